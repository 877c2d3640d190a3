"""Orlicz machinery for the exp/log complementary pair.

The pair is phi(s) = e^|s| - 1 - |s| and psi(t) = (1 + |t|) ln(1 + |t|) - |t|,
which are Young conjugates of each other.  The norm every bound consumes is
the average Orlicz norm on a finite interval I,

    ||f||  =  sup { |int_I f g| : int_I phi(g) <= |I| },

computed through its convex dual (Amemiya) form

    ||f||  =  inf_{kappa > 0}  kappa * ( |I| + int_I psi(|f| / kappa) ),

a one-dimensional convex minimization solved by golden section on log kappa.
The constrained-sup definition is kept as a brute-force oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceFailureError, NonfiniteInputError


def phi(s):
    """phi(s) = e^|s| - 1 - |s|, series-safe near 0 via expm1."""
    a = np.abs(s)
    return np.expm1(a) - a


def psi(t):
    """psi(t) = (1 + |t|) ln(1 + |t|) - |t|, stable for large t via log1p."""
    a = np.abs(t)
    return (1.0 + a) * np.log1p(a) - a


def phi_prime(s):
    a = np.abs(s)
    return np.sign(s) * np.expm1(a)


def phi_inv(y: float) -> float:
    """Inverse of phi on [0, inf), by bisection."""
    if y < 0:
        raise ValueError("phi is nonnegative")
    if y == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while phi(hi) < y:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if phi(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class NFunctionPair:
    """A complementary pair of N-functions (Young conjugates)."""

    phi: Callable
    psi: Callable
    phi_prime: Callable

    def conjugate_of_phi(self, t: float, s_grid: np.ndarray) -> float:
        """Grid evaluation of sup_s (s t - phi(s)); test oracle for duality."""
        return float(np.max(s_grid * t - self.phi(s_grid)))


EXP_PAIR = NFunctionPair(phi=phi, psi=psi, phi_prime=phi_prime)


@dataclass(frozen=True)
class SampledFunction1D:
    """Real function sampled on a uniform grid over an interval."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != values.shape:
            raise NonfiniteInputError("need matching 1-d grid and values with >= 2 samples")
        steps = np.diff(grid)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise NonfiniteInputError("grid must be uniform and strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def measure(self) -> float:
        return float(self.grid[-1] - self.grid[0])

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise NonfiniteInputError("samples must be finite")

    @classmethod
    def from_callable(cls, fn, a: float, b: float, n: int) -> "SampledFunction1D":
        x = np.linspace(a, b, n)
        return cls(grid=x, values=np.asarray(fn(x), dtype=float))


def quad_weights(grid: np.ndarray) -> np.ndarray:
    """Composite Simpson weights on a uniform grid (trapezoid patch on the
    last interval when the interval count is odd)."""
    n = grid.size
    h = grid[1] - grid[0]
    if n == 2:
        return np.full(2, 0.5 * h)
    w = np.zeros(n)
    m = n if n % 2 == 1 else n - 1  # largest odd prefix -> even interval count
    w[0] += h / 3.0
    w[m - 1] += h / 3.0
    w[1:m - 1:2] += 4.0 * h / 3.0
    w[2:m - 1:2] += 2.0 * h / 3.0
    if m < n:
        w[-2] += 0.5 * h
        w[-1] += 0.5 * h
    return w


def _golden_min(fn, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section minimum of a unimodal fn on [lo, hi]; returns (x, fn(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


# golden-section bracket for log(kappa); generous for desk-scale data
_LOG_KAPPA_LO = math.log(1e-12)
_LOG_KAPPA_HI = math.log(1e12)
_LOG_KAPPA_TOL = 1e-10


def avg_orlicz_norm(f: SampledFunction1D, pair: NFunctionPair = EXP_PAIR) -> float:
    """Average Orlicz norm of f over its interval via the Amemiya formula.

    Minimizes kappa * (mu(I) + int psi(|f|/kappa)) over kappa; the objective
    is convex (perspective of psi), so the golden-section minimum is global.
    """
    f.check_finite()
    mu = f.measure
    if mu <= 0:
        raise NonfiniteInputError("interval must have positive length")
    absf = np.abs(f.values)
    if not absf.any():
        return 0.0
    w = quad_weights(f.grid)

    def objective(log_kappa):
        kappa = math.exp(log_kappa)
        return kappa * (mu + float(w @ pair.psi(absf / kappa)))

    x, fx = _golden_min(objective, _LOG_KAPPA_LO, _LOG_KAPPA_HI, _LOG_KAPPA_TOL)
    # endpoint-growth guard: the bracket must contain the minimizer strictly
    if x - _LOG_KAPPA_LO < 1e-6 or _LOG_KAPPA_HI - x < 1e-6:
        raise ConvergenceFailureError(f"Amemiya minimizer at bracket endpoint (log kappa = {x:.3g})")
    return fx


def luxemburg_norm(f: SampledFunction1D, pair: NFunctionPair = EXP_PAIR, gauge: str = "psi") -> float:
    """Luxemburg-style gauge norm inf { kappa : int g(|f|/kappa) <= 1 }.

    gauge='psi' is the standard reading for the space L_psi; gauge='phi'
    reproduces the literal written form of the secondary definition.
    """
    f.check_finite()
    g = {"psi": pair.psi, "phi": pair.phi}[gauge]
    absf = np.abs(f.values)
    if not absf.any():
        return 0.0
    w = quad_weights(f.grid)

    def budget(kappa):
        return float(w @ g(absf / kappa)) - 1.0

    lo = hi = max(float(absf.max()), 1e-300)
    while budget(hi) > 0.0:
        hi *= 2.0
    while budget(lo) < 0.0 and lo > 1e-300:
        lo /= 2.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if budget(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def _project_to_budget(g: np.ndarray, w: np.ndarray, budget: float, pair: NFunctionPair) -> np.ndarray:
    """Euclidean projection of g >= 0 onto { sum w phi(g) <= budget }.

    KKT: g_i + nu * w_i * phi'(g_i) = z_i coordinate-wise, with nu >= 0 chosen
    so the constraint is active; inner solve by vectorized Newton.
    """
    z = g

    def solve_coords(nu):
        x = np.minimum(z, phi_inv(budget / max(w.min(), 1e-300)))
        for _ in range(40):
            r = x + nu * w * pair.phi_prime(x) - z
            dr = 1.0 + nu * w * np.exp(x)
            x = np.maximum(x - r / dr, 0.0)
            if np.max(np.abs(r)) < 1e-12 * (1.0 + np.max(np.abs(z))):
                break
        return x

    def used(nu):
        return float(w @ pair.phi(solve_coords(nu)))

    if used(0.0) <= budget:
        return z
    nu_hi = 1.0
    while used(nu_hi) > budget:
        nu_hi *= 4.0
        if nu_hi > 1e18:
            break
    nu_lo = 0.0
    for _ in range(40):
        nu = 0.5 * (nu_lo + nu_hi)
        if used(nu) > budget:
            nu_lo = nu
        else:
            nu_hi = nu
    return solve_coords(nu_hi)


def brute_force_avg_norm(
    f: SampledFunction1D,
    pair: NFunctionPair = EXP_PAIR,
    tol: float = 1e-7,
    max_iter: int = 300,
) -> float:
    """Direct discretization of the constrained-sup definition; test oracle.

    Maximizes sum w_i f_i g_i over { sum w_i phi(g_i) <= mu(I) } by projected
    gradient ascent (Euclidean projection onto the convex budget set), with
    backtracking on the step.  Independent of the Amemiya route.
    """
    f.check_finite()
    if f.grid.size > 512:
        raise ValueError("brute-force oracle is limited to <= 512 samples")
    mu = f.measure
    absf = np.abs(f.values)
    if not absf.any():
        return 0.0
    w = quad_weights(f.grid)
    grad = w * absf

    # start on the budget boundary, shaped like |f|
    lo, hi = 0.0, 1.0
    while float(w @ pair.phi(hi * absf)) < mu:
        hi *= 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if float(w @ pair.phi(mid * absf)) < mu:
            lo = mid
        else:
            hi = mid
    g = 0.5 * (lo + hi) * absf

    obj = float(grad @ g)
    step = 1.0 / max(float(np.linalg.norm(grad)), 1e-300)
    stall = 0
    for _ in range(max_iter):
        trial = _project_to_budget(g + step * grad, w, mu, pair)
        new_obj = float(grad @ trial)
        if new_obj > obj:
            rel_gain = (new_obj - obj) / max(abs(obj), 1e-300)
            g, obj = trial, new_obj
            step *= 1.3
            stall = stall + 1 if rel_gain < tol else 0
        else:
            step *= 0.5
            stall += 1
        if stall >= 6:
            return obj
    raise ConvergenceFailureError(f"projected ascent still improving after {max_iter} iterations")


def mixed_norm(
    v,
    j_interval: tuple[float, float],
    i_interval: tuple[float, float],
    pair: NFunctionPair = EXP_PAIR,
    nx: int = 33,
    ny: int = 129,
) -> float:
    """Mixed norm ||v||_{L1(J, L_psi(I))} = int_J ||v(x, .)|| dx.

    v is a callable v(x, y); the inner average Orlicz norms are taken over I
    on a uniform y-grid, and the outer integral uses composite Simpson on a
    uniform x-grid over J.
    """
    a, b = j_interval
    c, d = i_interval
    if not (b > a and d > c):
        raise NonfiniteInputError("intervals must have positive length")
    x = np.linspace(a, b, nx)
    y = np.linspace(c, d, ny)
    inner = np.empty(nx)
    for i, xi in enumerate(x):
        vals = np.asarray(v(np.full_like(y, xi), y), dtype=float)
        inner[i] = avg_orlicz_norm(SampledFunction1D(grid=y, values=vals), pair)
    return float(quad_weights(x) @ inner)
