"""Strip geometry: curvature functions, Frenet reconstruction, ellipticity constants.

The configuration space is the strip R x (0, d) mapped by
L(s, u) = gamma(s) + u * N(s), where gamma is a unit-speed plane curve with
curvature k(s) vanishing outside a finite window.  Everything downstream
consumes only k(s) and the width d, so curves are represented curvature-first
and reconstructed by integrating the Frenet system when an embedding is
actually needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidGeometryError,
    InvalidParamsError,
    OutOfStripError,
    SelfIntersectionSuspectedError,
    UnknownFamilyError,
)


@dataclass(frozen=True)
class CurvatureFunction:
    """Signed curvature sampled on a uniform arclength grid.

    Evaluation is piecewise linear between samples and identically zero
    outside the sampled window, so the strip is asymptotically straight.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != values.shape:
            raise InvalidParamsError("curvature needs matching 1-d grid and values with >= 2 samples")
        steps = np.diff(grid)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise InvalidParamsError("curvature grid must be uniform and strictly increasing")
        if not (grid[0] <= 0.0 <= grid[-1]):
            raise InvalidParamsError("curvature window must contain s = 0")
        if not np.all(np.isfinite(values)):
            raise InvalidParamsError("curvature samples must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def window(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    @property
    def kplus_sup(self) -> float:
        """Grid supremum of k+ = max(k, 0); the interpolant attains it at a node."""
        return max(0.0, float(self.values.max()))

    @property
    def kminus_sup(self) -> float:
        """Grid supremum of k- = max(-k, 0)."""
        return max(0.0, float(-self.values.min()))

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.values == 0.0))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.interp(s, self.grid, self.values, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def total_turning(self) -> float:
        """Integral of k over the window (trapezoid on the sampling grid)."""
        return float(np.trapz(self.values, self.grid))

    @classmethod
    def from_file(cls, path) -> "CurvatureFunction":
        data = np.loadtxt(path)
        if data.ndim != 2 or data.shape[1] != 2:
            raise InvalidParamsError(f"{path}: expected two columns (s, k)")
        return cls(grid=data[:, 0], values=data[:, 1])


def curvature_library(name: str, params: dict | None = None) -> CurvatureFunction:
    """Build a named curvature family.

    Families: ``zero``, ``constant`` (value, s_max), ``sech_bump``
    (amplitude, width, s_max) and ``gaussian_bump`` (amplitude, width, s_max).
    All are sampled on a uniform grid of ``samples`` points over
    [-s_max, s_max].
    """
    params = dict(params or {})
    samples = int(params.pop("samples", 257))
    if samples < 2:
        raise InvalidParamsError("curvature family needs samples >= 2")
    s_max = float(params.pop("s_max", 4.0))
    if s_max <= 0:
        raise InvalidParamsError("s_max must be positive")
    s = np.linspace(-s_max, s_max, samples)

    if name == "zero":
        vals = np.zeros_like(s)
    elif name == "constant":
        vals = np.full_like(s, float(params.pop("value", 0.0)))
    elif name == "sech_bump":
        a = float(params.pop("amplitude", 0.5))
        w = float(params.pop("width", 1.0))
        if w <= 0:
            raise InvalidParamsError("width must be positive")
        vals = a / np.cosh(s / w)
    elif name == "gaussian_bump":
        a = float(params.pop("amplitude", 0.5))
        w = float(params.pop("width", 1.0))
        if w <= 0:
            raise InvalidParamsError("width must be positive")
        vals = a * np.exp(-0.5 * (s / w) ** 2)
    else:
        raise UnknownFamilyError("curvature", name, CURVATURE_FAMILIES)
    if params:
        raise InvalidParamsError(f"unused curvature params: {sorted(params)}")
    return CurvatureFunction(grid=s, values=vals)


CURVATURE_FAMILIES = ("zero", "constant", "sech_bump", "gaussian_bump")


@dataclass(frozen=True)
class EmbeddedCurve:
    """Unit-speed plane curve with its Frenet frame on an arclength grid."""

    s: np.ndarray
    points: np.ndarray   # (n, 2)
    tangent: np.ndarray  # (n, 2), unit
    normal: np.ndarray   # (n, 2), unit, N = rot90(T)

    def strip_map(self, u: float) -> np.ndarray:
        """Parallel curve L(s, u) = gamma(s) + u N(s) at fixed offset u."""
        return self.points + u * self.normal


def _frenet_rhs(k_val: float, state: np.ndarray) -> np.ndarray:
    # state = (x, y, tx, ty); normal is (-ty, tx), so T' = k N, gamma' = T
    x, y, tx, ty = state
    return np.array([tx, ty, -k_val * ty, k_val * tx])


def _rk4_leg(curv: CurvatureFunction, s0: float, s1: float, state: np.ndarray, step: float) -> np.ndarray:
    """Integrate the Frenet system from s0 to s1 (one interpolation cell, any direction)."""
    length = s1 - s0
    if length == 0.0:
        return state
    n_sub = max(1, int(math.ceil(abs(length) / step)))
    h = length / n_sub
    s = s0
    for _ in range(n_sub):
        k1 = _frenet_rhs(curv(s), state)
        k2 = _frenet_rhs(curv(s + 0.5 * h), state + 0.5 * h * k1)
        k3 = _frenet_rhs(curv(s + 0.5 * h), state + 0.5 * h * k2)
        k4 = _frenet_rhs(curv(s + h), state + h * k3)
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        s += h
    return state


def reconstruct_curve(curvature: CurvatureFunction, step: float) -> EmbeddedCurve:
    """Reconstruct gamma from its curvature by RK4 on the Frenet system.

    gamma(0) = 0, T(0) = (1, 0); integration legs are aligned with the
    curvature cells so the piecewise-linear interpolant is smooth inside
    every RK4 substep and the classical fourth-order accuracy is retained.
    Output nodes coincide with the curvature grid.
    """
    if step <= 0:
        raise InvalidParamsError("step must be positive")
    grid = curvature.grid
    n = grid.size
    states = np.empty((n, 4))
    start = np.array([0.0, 0.0, 1.0, 0.0])

    # forward from s = 0
    right = np.searchsorted(grid, 0.0)  # first node >= 0
    state = start.copy()
    prev = 0.0
    for idx in range(right, n):
        state = _rk4_leg(curvature, prev, grid[idx], state, step)
        states[idx] = state
        prev = grid[idx]
    # backward from s = 0
    state = start.copy()
    prev = 0.0
    for idx in range(right - 1, -1, -1):
        state = _rk4_leg(curvature, prev, grid[idx], state, step)
        states[idx] = state
        prev = grid[idx]

    points = states[:, :2]
    tangent = states[:, 2:]
    normal = np.column_stack([-tangent[:, 1], tangent[:, 0]])
    return EmbeddedCurve(s=grid.copy(), points=points, tangent=tangent, normal=normal)


@dataclass(frozen=True)
class StripGeometry:
    """Width d plus curvature and every curvature-derived constant.

    m and M are the two-sided ellipticity constants of the metric weight
    1 - u k(s), l = sqrt((1 + d |k-|) / m) fixes the transverse comparison
    profile sin(pi l u / 2d), and beta is the squared L2 norm of that
    profile over (0, d).
    """

    d: float
    curvature: CurvatureFunction
    kplus_sup: float
    kminus_sup: float
    m: float
    M: float
    l: float
    beta: float
    lambda1_prime: float
    lambda1_star: float

    @property
    def threshold(self) -> float:
        """Bottom of the essential spectrum of the straight guide, pi^2/(4 d^2)."""
        return math.pi ** 2 / (4.0 * self.d ** 2)

    @property
    def is_straight(self) -> bool:
        return self.curvature.is_zero


def ellipticity_constants(d: float, curvature: CurvatureFunction) -> StripGeometry:
    """Derive every constant of the curved comparison machinery from (d, k).

    Raises Invalid-Geometry unless d * sup(k+) < 1.
    """
    if d <= 0:
        raise InvalidGeometryError(f"width must be positive, got d={d}")
    kp = curvature.kplus_sup
    km = curvature.kminus_sup
    if d * kp >= 1.0:
        raise InvalidGeometryError(f"d*sup(k+) = {d * kp:.6g} must be < 1")
    m = min(1.0 / (1.0 + d * km), 1.0 - d * kp)
    big_m = max(1.0 / (1.0 - d * kp), 1.0 + d * km)
    l = math.sqrt((1.0 + d * km) / m)
    # closed form of the integral of sin^2(pi l u / 2d) over (0, d)
    beta = d / 2.0 - (d / (2.0 * math.pi * l)) * math.sin(math.pi * l)
    threshold = math.pi ** 2 / (4.0 * d ** 2)
    lambda1_prime = (math.pi ** 2 / (4.0 * m * d ** 2)) * (1.0 + d * km)
    lambda1_star = (math.pi ** 2 / (4.0 * big_m * d ** 2)) * (1.0 - d * kp)
    if curvature.is_zero:
        # exact reductions, avoid round-off drift in the straight case
        m = big_m = l = 1.0
        beta = d / 2.0
        lambda1_prime = lambda1_star = threshold
    return StripGeometry(
        d=d,
        curvature=curvature,
        kplus_sup=kp,
        kminus_sup=km,
        m=m,
        M=big_m,
        l=l,
        beta=beta,
        lambda1_prime=lambda1_prime,
        lambda1_star=lambda1_star,
    )


def straight_geometry(d: float) -> StripGeometry:
    """Convenience constructor for the straight strip of width d."""
    return ellipticity_constants(d, curvature_library("zero", {"s_max": 1.0, "samples": 3}))


def jacobian(geom: StripGeometry, s, u):
    """Metric Jacobian sqrt(G) = 1 - u k(s) of the strip map.

    Values always lie in the ellipticity sandwich
    [1 - d |k+|, 1 + d |k-|].
    """
    s = np.asarray(s, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(u < 0.0) or np.any(u > geom.d):
        raise OutOfStripError(f"u must lie in [0, {geom.d}]")
    out = 1.0 - u * geom.curvature(s)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GeometryReport:
    """Outcome of the admissibility checks on a strip geometry."""

    d: float
    d_kplus: float
    assumption_ok: bool
    min_clearance: float
    clearance_required: float
    self_intersection_suspected: bool
    pairs_checked: int
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.assumption_ok and not self.self_intersection_suspected


def validate_geometry(geom: StripGeometry, step: float = 0.05, strict: bool = True) -> GeometryReport:
    """Check Assumption (A): d*sup(k+) < 1, plus a sampled self-intersection test.

    The intersection test reconstructs the midline (extended by straight
    tails), and flags the strip whenever two samples separated by more than
    2d of arclength come closer than d in the plane.  It is a heuristic:
    sampling can miss near-tangencies, and the 2d cutoff is safe only for
    curves honouring the ellipticity bound, which is checked first.

    With strict=True the failures raise (Invalid-Geometry resp.
    Self-Intersection-Suspected); otherwise they are reported.
    """
    notes = []
    d_kplus = geom.d * geom.kplus_sup
    assumption_ok = d_kplus < 1.0
    if not assumption_ok and strict:
        raise InvalidGeometryError(f"d*sup(k+) = {d_kplus:.6g} must be < 1")

    min_clearance = math.inf
    pairs = 0
    suspected = False
    if not geom.curvature.is_zero and assumption_ok:
        curve = reconstruct_curve(geom.curvature, step)
        s = curve.s
        pts = curve.points
        # extend with straight tails so exit rays can collide with the bent part
        tail = max(4.0 * geom.d, 1.0)
        n_tail = max(2, int(math.ceil(tail / max(step, geom.curvature.spacing))))
        ts = np.linspace(0.0, tail, n_tail + 1)[1:]
        s = np.concatenate([s[0] - ts[::-1], s, s[-1] + ts])
        pts = np.vstack([
            pts[0] + (-ts[::-1])[:, None] * curve.tangent[0],
            pts,
            pts[-1] + ts[:, None] * curve.tangent[-1],
        ])
        arc_gap = np.abs(s[:, None] - s[None, :])
        dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        mask = arc_gap > 2.0 * geom.d
        pairs = int(mask.sum() // 2)
        if pairs:
            min_clearance = float(dist[mask].min())
            suspected = min_clearance <= geom.d
    else:
        notes.append("straight strip: intersection check skipped")

    if suspected and strict:
        raise SelfIntersectionSuspectedError(
            f"midline clearance {min_clearance:.4g} <= d = {geom.d} (sampled check)"
        )
    return GeometryReport(
        d=geom.d,
        d_kplus=d_kplus,
        assumption_ok=assumption_ok,
        min_clearance=min_clearance,
        clearance_required=geom.d,
        self_intersection_suspected=suspected,
        pairs_checked=pairs,
        notes=tuple(notes),
    )
