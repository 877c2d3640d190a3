"""Finite-difference eigensolvers for the straight and curved strip operators.

The operator H = -Laplace - V on the truncated strip (-S, S) x (0, d) carries
Dirichlet conditions at y = 0 and x = +-S and a Neumann condition at y = d.
Discretization goes through the quadratic form on a tensor grid: stiffness
from squared edge differences, diagonal mass from the trapezoid rule in each
direction, so every assembled matrix is symmetric and the curved metric
weight 1 - u k(s) enters edge-wise and node-wise exactly as it appears in the
form.  Eigenvalues below the essential-spectrum threshold pi^2/(4 d^2) are
then generalized eigenvalues of (A, B) with A = K - diag(V m), B = diag(m).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import (
    CapReachedError,
    EigensolverNonconvergenceError,
    GridTooSmallError,
    InvalidGeometryError,
    InvalidParamsError,
)
from .geometry import StripGeometry, validate_geometry
from .orlicz import SampledFunction1D
from .potentials import Potential

DENSE_DOF_LIMIT = 4000
BELOW_MARGIN_REL = 1e-9


@dataclass(frozen=True)
class Grid2D:
    """Tensor grid on the truncated strip [-S, S] x [0, d]."""

    S: float
    d: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.S <= 0 or self.d <= 0:
            raise InvalidParamsError("S and d must be positive")
        if self.nx < 3 or self.ny < 3:
            raise InvalidParamsError("need nx >= 3 and ny >= 3 nodes")

    @property
    def hx(self) -> float:
        return 2.0 * self.S / (self.nx - 1)

    @property
    def hy(self) -> float:
        return self.d / (self.ny - 1)

    def refined(self, levels: int = 1) -> "Grid2D":
        """Halve both spacings `levels` times."""
        nx, ny = self.nx, self.ny
        for _ in range(levels):
            nx, ny = 2 * nx - 1, 2 * ny - 1
        return Grid2D(S=self.S, d=self.d, nx=nx, ny=ny)


def _ones_weight(xs, ys):
    return np.ones(np.broadcast(xs, ys).shape)


@dataclass
class Assembly:
    """Assembled form matrices plus the node layout they live on.

    DOF ordering is x-major: dof = ix * len(y) + iy over the unknown nodes.
    """

    stiffness: sp.csr_matrix
    mass: np.ndarray         # diagonal of B (includes the metric weight)
    v_nodes: np.ndarray
    node_weight: np.ndarray  # metric weight 1 - u k(s) at the unknown nodes
    x: np.ndarray
    y: np.ndarray
    d: float
    bc: tuple
    meta: dict = field(default_factory=dict)

    @property
    def n_dofs(self) -> int:
        return self.mass.size

    @property
    def A(self) -> sp.csr_matrix:
        return (self.stiffness - sp.diags(self.v_nodes * self.mass)).tocsr()

    @property
    def B(self) -> sp.dia_matrix:
        return sp.diags(self.mass)

    @property
    def potential_mass(self) -> sp.dia_matrix:
        """diag(V) B, the potential part of the form."""
        return sp.diags(self.v_nodes * self.mass)

    @property
    def v_max(self) -> float:
        return float(self.v_nodes.max()) if self.v_nodes.size else 0.0

    def folded(self) -> sp.csr_matrix:
        """Mass-folded operator B^{-1/2} A B^{-1/2} (a standard eigenproblem)."""
        s = 1.0 / np.sqrt(self.mass)
        return (sp.diags(s) @ self.A @ sp.diags(s)).tocsr()


def _assemble(x_nodes, y_nodes, bc, ws, wu, wm, vfun) -> Assembly:
    """Edge/node assembly of the weighted form on a tensor grid.

    bc = (x_lo, x_hi, y_lo, y_hi) with entries 'D' or 'N'.  Dirichlet nodes
    are eliminated; Neumann nodes stay with trapezoid half-weights.  ws and wu
    weight the x- and y-derivative terms at edge midpoints, wm the mass at
    nodes.
    """
    hx = x_nodes[1] - x_nodes[0]
    hy = y_nodes[1] - y_nodes[0]
    ix0 = 1 if bc[0] == "D" else 0
    ix1 = x_nodes.size - (2 if bc[1] == "D" else 1)
    jy0 = 1 if bc[2] == "D" else 0
    jy1 = y_nodes.size - (2 if bc[3] == "D" else 1)
    xu = x_nodes[ix0:ix1 + 1]
    yu = y_nodes[jy0:jy1 + 1]
    mx, my = xu.size, yu.size
    thx = np.ones(mx)
    thy = np.ones(my)
    if bc[0] == "N":
        thx[0] = 0.5
    if bc[1] == "N":
        thx[-1] = 0.5
    if bc[2] == "N":
        thy[0] = 0.5
    if bc[3] == "N":
        thy[-1] = 0.5

    diag = np.zeros((mx, my))
    rows, cols, vals = [], [], []

    def add_offdiag(ia, ja, c):
        rows.append(ia)
        cols.append(ja)
        vals.append(-c)
        rows.append(ja)
        cols.append(ia)
        vals.append(-c)

    # x-derivative term: edges between unknown columns
    if mx > 1:
        xm = 0.5 * (xu[:-1] + xu[1:])
        c = (hy / hx) * thy[None, :] * ws(xm[:, None], yu[None, :])
        base = np.arange(mx - 1)[:, None] * my + np.arange(my)[None, :]
        add_offdiag(base.ravel(), (base + my).ravel(), c.ravel())
        diag[:-1, :] += c
        diag[1:, :] += c
    # edges to eliminated Dirichlet columns contribute only to the diagonal
    if bc[0] == "D":
        c = (hy / hx) * thy * ws(0.5 * (x_nodes[0] + xu[0]), yu)
        diag[0, :] += c
    if bc[1] == "D":
        c = (hy / hx) * thy * ws(0.5 * (x_nodes[-1] + xu[-1]), yu)
        diag[-1, :] += c

    # y-derivative term
    if my > 1:
        ym = 0.5 * (yu[:-1] + yu[1:])
        c = (hx / hy) * thx[:, None] * wu(xu[:, None], ym[None, :])
        base = np.arange(mx)[:, None] * my + np.arange(my - 1)[None, :]
        add_offdiag(base.ravel(), (base + 1).ravel(), c.ravel())
        diag[:, :-1] += c
        diag[:, 1:] += c
    if bc[2] == "D":
        c = (hx / hy) * thx * wu(xu, 0.5 * (y_nodes[0] + yu[0]))
        diag[:, 0] += c
    if bc[3] == "D":
        c = (hx / hy) * thx * wu(xu, 0.5 * (y_nodes[-1] + yu[-1]))
        diag[:, -1] += c

    n = mx * my
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag.ravel())
    stiffness = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()

    weight = wm(xu[:, None], yu[None, :]) * np.ones((mx, my))
    mass = (hx * hy) * thx[:, None] * thy[None, :] * weight
    v_nodes = vfun(xu[:, None], yu[None, :]) * np.ones((mx, my))
    return Assembly(
        stiffness=stiffness,
        mass=mass.ravel(),
        v_nodes=v_nodes.ravel(),
        node_weight=weight.ravel(),
        x=xu,
        y=yu,
        d=float(y_nodes[-1] - y_nodes[0]),
        bc=bc,
    )


def _check_support(v: Potential, grid: Grid2D):
    if v.x_lo < -grid.S or v.x_hi > grid.S:
        raise GridTooSmallError(
            f"potential support [{v.x_lo}, {v.x_hi}] exceeds truncation [-{grid.S}, {grid.S}]"
        )


def assemble_straight(v: Potential, d: float, grid: Grid2D) -> Assembly:
    """Form matrices of -Laplace - V on the truncated straight strip."""
    if abs(d - grid.d) > 1e-12 * max(d, 1.0):
        raise InvalidParamsError("grid width does not match d")
    if not v.is_zero:
        _check_support(v, grid)
    x = np.linspace(-grid.S, grid.S, grid.nx)
    y = np.linspace(0.0, d, grid.ny)
    asm = _assemble(x, y, ("D", "D", "D", "N"), _ones_weight, _ones_weight, _ones_weight, v)
    asm.meta.update(S=grid.S, nx=grid.nx, ny=grid.ny, kind="straight")
    return asm


def assemble_curved(v: Potential, geom: StripGeometry, grid: Grid2D) -> Assembly:
    """Form matrices of -Laplace_Omega - V in the curved metric.

    The x-derivative term is weighted by 1/(1 - u k), the y-derivative term
    and the mass by (1 - u k); a generalized pair (A, B) comes back, with B
    the weighted diagonal mass.
    """
    validate_geometry(geom, strict=True)
    if abs(geom.d - grid.d) > 1e-12 * max(geom.d, 1.0):
        raise InvalidParamsError("grid width does not match geometry")
    if not v.is_zero:
        _check_support(v, grid)
    lo, hi = geom.curvature.window
    if not geom.curvature.is_zero and (lo < -grid.S or hi > grid.S):
        raise GridTooSmallError("curvature window exceeds the truncation")
    k = geom.curvature

    def jac(xs, ys):
        return 1.0 - ys * k(xs)

    def inv_jac(xs, ys):
        return 1.0 / (1.0 - ys * k(xs))

    x = np.linspace(-grid.S, grid.S, grid.nx)
    y = np.linspace(0.0, geom.d, grid.ny)
    asm = _assemble(x, y, ("D", "D", "D", "N"), inv_jac, jac, jac, v)
    asm.meta.update(S=grid.S, nx=grid.nx, ny=grid.ny, kind="curved")
    if asm.node_weight.min() <= 0.0:
        raise InvalidGeometryError("metric weight non-positive on the grid")
    return asm


@dataclass(frozen=True)
class SpectralResult:
    """Eigenvalues of the discretized operator strictly below the threshold."""

    eigenvalues_below: np.ndarray
    count: int
    negative_sum: float
    threshold: float
    metadata: dict

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues_below, dtype=float)
        object.__setattr__(self, "eigenvalues_below", ev)
        if ev.size and np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        if self.count != ev.size or self.negative_sum < 0:
            raise ValueError("inconsistent spectral result")

    @property
    def lowest(self) -> float:
        return float(self.eigenvalues_below[0]) if self.count else math.nan


def _certified_result(values, cutoff, threshold, count_cap, meta) -> SpectralResult:
    below = np.sort(values[values < cutoff])
    if below.size > count_cap:
        raise CapReachedError(
            f"{below.size} eigenvalues below threshold exceed cap {count_cap}", eigenvalues=below
        )
    return SpectralResult(
        eigenvalues_below=below,
        count=int(below.size),
        negative_sum=float(np.sum(threshold - below)),
        threshold=threshold,
        metadata=meta,
    )


def eigen_below(assembly: Assembly, threshold: float, count_cap: int = 512) -> SpectralResult:
    """All eigenvalues of (A, B) strictly below `threshold` (relative margin 1e-9).

    Sparse path: shift-invert Lanczos about a shift placed strictly below the
    spectrum bottom (A >= -max V in the B inner product), doubling the
    requested count until the returned set provably crosses the threshold.
    Dense path below 4000 DOFs.
    """
    if threshold <= 0:
        raise InvalidParamsError("threshold must be positive")
    cutoff = threshold * (1.0 - BELOW_MARGIN_REL)
    n = assembly.n_dofs
    meta = dict(assembly.meta)
    meta.update(dofs=n, threshold=threshold)

    c_op = assembly.folded()
    if n < DENSE_DOF_LIMIT:
        vals = sla.eigh(c_op.toarray(), eigvals_only=True, subset_by_value=(-np.inf, cutoff))
        meta.update(method="dense")
        return _certified_result(vals, cutoff, threshold, count_cap, meta)

    sigma = -assembly.v_max - max(1.0, 0.05 * threshold)
    k = min(32, n - 2)
    meta.update(method="shift-invert", sigma=sigma)
    v0 = np.random.default_rng(20240811).standard_normal(n)  # deterministic reruns
    while True:
        try:
            vals = eigsh(c_op, k=k, sigma=sigma, which="LM", return_eigenvectors=False, v0=v0)
        except ArpackNoConvergence as exc:
            try:
                vals = eigsh(
                    c_op, k=k, sigma=sigma, which="LM", return_eigenvectors=False, v0=v0,
                    ncv=min(n, 4 * k + 20), maxiter=10000,
                )
            except ArpackNoConvergence as exc2:
                raise EigensolverNonconvergenceError(
                    f"ARPACK converged {len(exc2.eigenvalues)} of {k} eigenvalues",
                    residuals=exc2.eigenvalues,
                ) from exc
        vals = np.sort(vals)
        meta.update(k_used=k)
        if vals.size and vals[-1] >= cutoff:
            return _certified_result(vals, cutoff, threshold, count_cap, meta)
        if k >= n - 2:
            return _certified_result(vals, cutoff, threshold, count_cap, meta)
        if np.sum(vals < cutoff) >= count_cap:
            raise CapReachedError(
                f"count cap {count_cap} reached before the below-threshold set was certified",
                eigenvalues=np.sort(vals[vals < cutoff]),
            )
        k = min(2 * k, n - 2)


def solve_straight(v: Potential, d: float, grid: Grid2D, count_cap: int = 512) -> SpectralResult:
    """Assemble and solve the straight guide; threshold is pi^2/(4 d^2)."""
    threshold = math.pi ** 2 / (4.0 * d ** 2)
    return eigen_below(assemble_straight(v, d, grid), threshold, count_cap)


def solve_curved(v: Potential, geom: StripGeometry, grid: Grid2D, count_cap: int = 512) -> SpectralResult:
    """Assemble and solve the curved guide at the straight threshold."""
    return eigen_below(assemble_curved(v, geom, grid), geom.threshold, count_cap)


def solve_1d(potential: SampledFunction1D, factor: float, S: float, n: int) -> np.ndarray:
    """Negative eigenvalues of -h'' - factor * potential on (-S, S), Dirichlet ends.

    `factor` is 1 or 2 depending on which transverse reduction produced the
    effective potential; the potential samples are interpolated onto the
    solve grid and taken as 0 outside their window.
    """
    if factor not in (1, 2, 1.0, 2.0):
        raise InvalidParamsError("factor must be 1 or 2")
    if n < 3 or S <= 0:
        raise InvalidParamsError("need n >= 3 and S > 0")
    x = np.linspace(-S, S, n)
    h = x[1] - x[0]
    vv = factor * np.interp(x[1:-1], potential.grid, potential.values, left=0.0, right=0.0)
    vd = 2.0 / h ** 2 - vv
    off = np.full(vv.size - 1, -1.0 / h ** 2)
    vmax = float(vv.max()) if vv.size else 0.0
    lo = -vmax - 1.0
    hi = -1e-12 * max(1.0, vmax)
    vals = sla.eigh_tridiagonal(vd, off, select="v", select_range=(lo, hi), eigvals_only=True)
    return np.sort(vals)


def cell_spectrum(d: float, n: int = 129) -> tuple[float, float]:
    """First two eigenvalues of -Laplace on the unit cell (0,1) x (0,d).

    Boundary conditions: Neumann at x = 0, 1; Dirichlet at y = 0; Neumann at
    y = d.  The exact values are pi^2/(4 d^2) and
    min(pi^2 + pi^2/(4 d^2), 9 pi^2/(4 d^2)).
    """
    if n < 32:
        raise InvalidParamsError("cell grid needs n >= 32 per direction")
    x = np.linspace(0.0, 1.0, n)
    y = np.linspace(0.0, d, n)
    zero = potential_zero(d)
    asm = _assemble(x, y, ("N", "N", "D", "N"), _ones_weight, _ones_weight, _ones_weight, zero)
    c_op = asm.folded()
    m = asm.n_dofs
    if m < DENSE_DOF_LIMIT:
        vals = sla.eigh(c_op.toarray(), eigvals_only=True, subset_by_index=(0, 1))
    else:
        v0 = np.random.default_rng(20240811).standard_normal(m)
        vals = np.sort(eigsh(c_op, k=2, sigma=-1.0, which="LM", return_eigenvectors=False, v0=v0))
    return float(vals[0]), float(vals[1])


def potential_zero(d: float) -> Potential:
    from .potentials import potential_library

    return potential_library("zero", {}, d)


@dataclass(frozen=True)
class GapCheckReport:
    """Outcome of the randomized spectral-gap inequality check."""

    d: float
    c1: float
    inflation: float
    trials: int
    passes: int
    degenerate: int
    worst_ratio: float

    @property
    def all_passed(self) -> bool:
        return self.passes == self.trials


def projected_gap_check(
    d: float,
    grid: Grid2D,
    trials: int = 100,
    seed: int = 0,
    inflation: float = 1.02,
    vectors=None,
) -> GapCheckReport:
    """Check int |u|^2 <= C1 * (int |grad u|^2 - tau int |u|^2) on projected vectors.

    Vectors are projected slice-wise orthogonal to the transverse ground
    profile sin(pi y / 2d) in the discrete L2(0, d) inner product; C1 is
    max(1, d^2/2) / pi^2 and tau = pi^2/(4 d^2).  Failures are counted, not
    raised; the degenerate all-zero projection counts as a pass (0 <= 0).
    """
    zero = potential_zero(d)
    asm = assemble_straight(zero, d, grid)
    k_mat = asm.stiffness
    mass = asm.mass
    tau = math.pi ** 2 / (4.0 * d ** 2)
    c1 = max(1.0, d ** 2 / 2.0) / math.pi ** 2
    mx, my = asm.x.size, asm.y.size
    profile = np.sin(math.pi * asm.y / (2.0 * d))
    # the unweighted mass factorizes as (hx thx_i)(hy thy_j): any row carries
    # the transverse quadrature weights needed for the slice-wise projection
    wy = mass.reshape(mx, my)[0]
    pw = profile * wy
    pnorm = float(profile @ pw)

    rng = np.random.default_rng(seed)
    if vectors is None:
        vectors = [rng.standard_normal(mx * my) for _ in range(trials)]
    else:
        vectors = [np.asarray(v, dtype=float).ravel() for v in vectors]
    passes = degenerate = 0
    worst = 0.0
    scale = float(mass.sum())
    for vec in vectors:
        u = vec.reshape(mx, my).copy()
        coef = (u @ pw) / pnorm
        u -= np.outer(coef, profile)
        uf = u.ravel()
        lhs = float(uf @ (mass * uf))
        rhs = float(uf @ (k_mat @ uf)) - tau * lhs
        if lhs <= 1e-12 * scale * max(1.0, float(np.max(np.abs(uf))) ** 2):
            degenerate += 1
            passes += 1
            continue
        ratio = lhs / rhs if rhs > 0 else math.inf
        worst = max(worst, ratio)
        if lhs <= inflation * c1 * rhs:
            passes += 1
    return GapCheckReport(
        d=d,
        c1=c1,
        inflation=inflation,
        trials=len(vectors),
        passes=passes,
        degenerate=degenerate,
        worst_ratio=worst,
    )


@dataclass(frozen=True)
class FormComparison:
    """Discrete sandwich of the curved form between straight comparison forms.

    lower <= qform <= upper as quadratic forms; all three live on the same
    grid and share the unweighted diagonal mass `mass0`.
    """

    lower: sp.csr_matrix
    qform: sp.csr_matrix
    upper: sp.csr_matrix
    mass0: np.ndarray


def curved_form_comparison(v: Potential, geom: StripGeometry, grid: Grid2D) -> FormComparison:
    """Build the three matrices of the two-sided form comparison.

    qform is the full curved form (shifted by the threshold, metric-weighted);
    lower/upper are its straight-Laplacian bounds with the ellipticity
    constants m and M, the comparison thresholds lambda1' and lambda1*, and
    potential coefficients (1 +- d |k-+|)/(m or M).
    """
    curved = assemble_curved(v, geom, grid)
    straight = assemble_straight(v, geom.d, grid)
    tau = geom.threshold
    k0 = straight.stiffness
    m0 = straight.mass
    vm0 = sp.diags(straight.v_nodes * m0)
    qform = (curved.A - tau * curved.B).tocsr()
    km, kp = geom.kminus_sup, geom.kplus_sup
    lower = (geom.m * k0 - tau * (1.0 + geom.d * km) * sp.diags(m0)
             - ((1.0 + geom.d * km) / geom.m) * vm0).tocsr()
    upper = (geom.M * k0 - tau * (1.0 - geom.d * kp) * sp.diags(m0)
             - ((1.0 - geom.d * kp) / geom.M) * vm0).tocsr()
    return FormComparison(lower=lower, qform=qform, upper=upper, mass0=m0)


def export_matrix_coo(mat) -> str:
    """Symmetric sparse matrix in coordinate text form: '# n n nnz' then 'i j v' rows."""
    coo = sp.coo_matrix(mat)
    buf = io.StringIO()
    buf.write(f"# {coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
    for i, j, val in zip(coo.row, coo.col, coo.data):
        buf.write(f"{i} {j} {val:.17g}\n")
    return buf.getvalue()


def load_matrix_coo(text: str) -> sp.csr_matrix:
    lines = text.strip().splitlines()
    n_rows, n_cols, _ = (int(t) for t in lines[0].lstrip("# ").split())
    rows, cols, vals = [], [], []
    for line in lines[1:]:
        i, j, val = line.split()
        rows.append(int(i))
        cols.append(int(j))
        vals.append(float(val))
    return sp.coo_matrix((vals, (rows, cols)), shape=(n_rows, n_cols)).tocsr()
