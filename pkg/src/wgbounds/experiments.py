"""Experiment orchestration: sweeps, CSV/plot-data artifacts, calibration runs.

Artifacts are plain text: CSV files with '#' header lines carrying the verb
and the config hash, and two-column gnuplot-style .dat files.  Given the same
config and seed the numerical content is byte-identical between runs (the
creation timestamp line is the only varying part).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import bounds as bd
from .config import ExperimentConfig, config_hash
from .errors import WgBoundsError
from .geometry import GeometryReport, ellipticity_constants, validate_geometry
from .solver import Grid2D, SpectralResult, projected_gap_check, solve_curved, solve_straight


@dataclass
class RunArtifact:
    """Output files (name -> text) plus a JSON-safe summary."""

    verb: str
    config_hash: str
    files: dict[str, str] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name in sorted(self.files):
            path = out / name
            path.write_text(self.files[name])
            written.append(path)
        return written


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


def _header(verb: str, cfg_hash: str, columns: str) -> str:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return (
        f"# wgbounds {verb}\n"
        f"# config_hash={cfg_hash}\n"
        f"# created={stamp}\n"
        f"{columns}\n"
    )


def _csv(verb, cfg_hash, columns, rows) -> str:
    body = "".join(",".join(_fmt(v) for v in row) + "\n" for row in rows)
    return _header(verb, cfg_hash, columns) + body


def _dat(verb, cfg_hash, columns, rows) -> str:
    head = _header(verb, cfg_hash, "# columns: " + columns)
    return head + "".join(" ".join(_fmt(v) for v in row) + "\n" for row in rows)


def _grids(cfg: ExperimentConfig) -> list[Grid2D]:
    base = Grid2D(S=cfg.grid.S, d=cfg.geometry.d, nx=cfg.grid.nx, ny=cfg.grid.ny)
    return [base.refined(level) for level in range(cfg.grid.levels)]


def _solve(cfg: ExperimentConfig, geom, potential, grid) -> SpectralResult:
    if geom.is_straight:
        return solve_straight(potential, geom.d, grid, count_cap=cfg.count_cap)
    return solve_curved(potential, geom, grid, count_cap=cfg.count_cap)


def _parallel_map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def validate_run(cfg: ExperimentConfig) -> RunArtifact:
    """Geometry and config admissibility; never raises on check failure."""
    cfg_hash = config_hash(cfg)
    curv = cfg.geometry.curvature.build()
    d = cfg.geometry.d
    potential = cfg.potential.build(d)
    d_kplus = d * curv.kplus_sup
    if d_kplus < 1.0:
        geom = ellipticity_constants(d, curv)
        report: GeometryReport = validate_geometry(geom, step=min(0.05, d / 4.0), strict=False)
    else:
        report = GeometryReport(
            d=d, d_kplus=d_kplus, assumption_ok=False, min_clearance=math.nan,
            clearance_required=d, self_intersection_suspected=False, pairs_checked=0,
            notes=("ellipticity check failed; intersection check skipped",),
        )
    support_ok = potential.is_zero or (
        -cfg.grid.S <= potential.x_lo and potential.x_hi <= cfg.grid.S
    )
    valid = report.assumption_ok and not report.self_intersection_suspected and support_ok
    lines = [
        f"geometry d={d} d_kplus={report.d_kplus:.6g} assumption_ok={report.assumption_ok}",
        f"self_intersection_suspected={report.self_intersection_suspected} "
        f"min_clearance={report.min_clearance:.6g} required>{report.clearance_required:.6g}",
        f"potential family={potential.name} support=[{potential.x_lo:.6g}, {potential.x_hi:.6g}] "
        f"support_within_truncation={support_ok}",
        f"valid={valid}",
    ]
    art = RunArtifact(verb="validate", config_hash=cfg_hash)
    art.files["validate.txt"] = _header("validate", cfg_hash, "# checks") + "\n".join(lines) + "\n"
    art.summary = {
        "valid": valid,
        "assumption_ok": report.assumption_ok,
        "d_kplus": report.d_kplus,
        "self_intersection_suspected": report.self_intersection_suspected,
        "support_ok": support_ok,
    }
    return art


def _spectral_rows(cfg, geom, potential):
    """(alpha, level) sweep; returns spectral rows, convergence rows, results.

    A failing job does not lose the completed ones: the raised error carries
    the partial spectral rows, closed by a FAILED marker row.
    """
    grids = _grids(cfg)
    jobs = [(alpha, level) for alpha in cfg.potential.alphas for level in range(len(grids))]

    def run(job):
        alpha, level = job
        try:
            return job, _solve(cfg, geom, potential.scaled(alpha), grids[level])
        except WgBoundsError as exc:
            return job, exc

    results = dict(_parallel_map(run, jobs, cfg.threads))
    spectral, convergence = [], []
    finest = {}
    failure = None
    for alpha in cfg.potential.alphas:
        prev_low = None
        for level, grid in enumerate(grids):
            res = results[(alpha, level)]
            if isinstance(res, WgBoundsError):
                spectral.append(
                    ("FAILED", f"alpha={alpha}", f"level={level}", type(res).__name__, str(res), "", "")
                )
                failure = failure or res
                continue
            spectral.append(
                (alpha, grid.S, grid.nx, grid.ny, res.count, res.negative_sum, res.lowest)
            )
            drift = math.nan
            if prev_low is not None and res.count and not math.isnan(prev_low):
                drift = abs(res.lowest - prev_low) / max(abs(res.lowest), 1e-300)
            convergence.append((alpha, level, grid.nx, grid.ny, res.count, res.lowest, drift))
            prev_low = res.lowest
            finest[alpha] = (res, drift)
    if failure is not None:
        failure.partial_rows = spectral
        raise failure
    return spectral, convergence, finest


def solve_run(cfg: ExperimentConfig) -> RunArtifact:
    """Spectral sweep over the alpha list and refinement levels."""
    cfg_hash = config_hash(cfg)
    geom = cfg.geometry.build()
    potential = cfg.potential.build(geom.d)
    art = RunArtifact(verb="solve", config_hash=cfg_hash)
    try:
        spectral, convergence, finest = _spectral_rows(cfg, geom, potential)
        sweep_rows = []
        for s_val in cfg.grid.S_sweep:
            nx = int(round((cfg.grid.nx - 1) * s_val / cfg.grid.S)) + 1
            grid = Grid2D(S=s_val, d=geom.d, nx=max(nx, 3), ny=cfg.grid.ny)
            res = _solve(cfg, geom, potential.scaled(cfg.potential.alphas[-1]), grid)
            sweep_rows.append((1.0 / s_val, res.lowest, res.count, res.negative_sum))
        if sweep_rows:
            art.files["eig_vs_invS.dat"] = _dat(
                "solve", cfg_hash, "inv_S lowest_eig count negative_sum", sweep_rows
            )
    except WgBoundsError as exc:
        partial = getattr(exc, "partial_rows", [("FAILED", type(exc).__name__, str(exc), "", "", "", "")])
        art.files["spectral.csv"] = _csv(
            "solve", cfg_hash, "alpha,S,nx,ny,count,negative_sum,lowest_eig", partial
        )
        exc.partial_artifact = art
        raise
    art.files["spectral.csv"] = _csv(
        "solve", cfg_hash, "alpha,S,nx,ny,count,negative_sum,lowest_eig", spectral
    )
    art.files["convergence.csv"] = _csv(
        "solve", cfg_hash, "alpha,level,nx,ny,count,lowest_eig,drift", convergence
    )
    art.files["nminus_vs_alpha.dat"] = _dat(
        "solve", cfg_hash, "alpha nminus",
        [(alpha, finest[alpha][0].count) for alpha in cfg.potential.alphas],
    )
    counts = [finest[alpha][0].count for alpha in cfg.potential.alphas]
    art.summary = {
        "counts": counts,
        "negative_sums": [finest[a][0].negative_sum for a in cfg.potential.alphas],
        "lowest": [finest[a][0].lowest for a in cfg.potential.alphas],
        "monotone_counts": all(b >= a for a, b in zip(counts, counts[1:])),
    }
    return art


def _bound_rows(cfg, geom, potential, constants):
    rows, summary_rows, reports = [], [], {}
    for alpha in cfg.potential.alphas:
        rep = bd.bound_report(potential.scaled(alpha), geom, cfg.grid.S, constants)
        reports[alpha] = rep
        ks = sorted(set(rep.beta) | set(rep.orlicz_c) | set(rep.gamma or {}) | set(rep.orlicz_d or {}))
        for k in ks:
            rows.append((
                alpha, k,
                rep.beta.get(k), rep.orlicz_c.get(k),
                (rep.gamma or {}).get(k), (rep.orlicz_d or {}).get(k),
            ))
        summary_rows.append((
            alpha, rep.straight_rhs, rep.curved_rhs, rep.lt_rhs,
            constants.c4, constants.c5, constants.c6,
            constants.c11, constants.c12, constants.c13,
            constants.c16, constants.c17(None if geom.is_straight else geom),
        ))
    return rows, summary_rows, reports


def _bounds_csv(verb, cfg_hash, rows, summary_rows, notes) -> str:
    text = _csv(verb, cfg_hash, "alpha,k,beta_k,C_k,gamma_k,D_k", rows)
    text += "# summary\n"
    text += "alpha,straight_rhs,curved_rhs,lt_rhs,c4,c5,c6,c11,c12,c13,c16,c17\n"
    text += "".join(",".join(_fmt(v) for v in row) + "\n" for row in summary_rows)
    for note in notes:
        text += f"# note: {note}\n"
    return text


def bounds_run(cfg: ExperimentConfig) -> RunArtifact:
    """Bound ingredients and right-hand sides, no eigen-solves."""
    cfg_hash = config_hash(cfg)
    geom = cfg.geometry.build()
    potential = cfg.potential.build(geom.d)
    constants = cfg.constants.build()
    rows, summary_rows, reports = _bound_rows(cfg, geom, potential, constants)
    art = RunArtifact(verb="bounds", config_hash=cfg_hash)
    notes = reports[cfg.potential.alphas[0]].notes
    art.files["bounds.csv"] = _bounds_csv("bounds", cfg_hash, rows, summary_rows, notes)
    mode_rhs = {a: (reports[a].curved_rhs if not geom.is_straight else reports[a].straight_rhs)
                for a in cfg.potential.alphas}
    art.files["bound_vs_alpha.dat"] = _dat(
        "bounds", cfg_hash, "alpha bound_rhs",
        [(a, mode_rhs[a]) for a in cfg.potential.alphas],
    )
    art.summary = {
        "straight_rhs": [reports[a].straight_rhs for a in cfg.potential.alphas],
        "curved_rhs": [reports[a].curved_rhs for a in cfg.potential.alphas],
        "lt_rhs": [reports[a].lt_rhs for a in cfg.potential.alphas],
        "notes": list(notes),
    }
    return art


def _family_members(cfg, geom, potential, mode):
    """Solver ground truth plus bound ingredients for the config's alpha family."""
    grid = _grids(cfg)[-1]

    def run(alpha):
        scaled = potential.scaled(alpha)
        res = _solve(cfg, geom, scaled, grid)
        rep = bd.bound_report(scaled, geom, cfg.grid.S, cfg.constants.build())
        dyadic = rep.gamma if (mode == "curved" and rep.gamma is not None) else rep.beta
        orlicz = rep.orlicz_d if (mode == "curved" and rep.orlicz_d is not None) else rep.orlicz_c
        factor = 1.0 if geom.is_straight else (1.0 - geom.d * geom.kplus_sup) ** 2 / geom.M ** 2
        return bd.FamilyMember(
            dyadic=dyadic,
            orlicz=orlicz,
            count=res.count,
            negative_sum=res.negative_sum,
            l2_squared=scaled.l2_norm_squared(),
            geometry_factor=factor,
        )

    return _parallel_map(run, list(cfg.potential.alphas), cfg.threads)


def calibrate_run(cfg: ExperimentConfig) -> RunArtifact:
    """Fit the bound constants on the config's alpha family."""
    cfg_hash = config_hash(cfg)
    geom = cfg.geometry.build()
    potential = cfg.potential.build(geom.d)
    mode = "straight" if geom.is_straight else "curved"
    members = _family_members(cfg, geom, potential, mode)
    scan = tuple(cfg.constants.scan)
    constants = bd.calibrate(members, mode, cfg.constants.build(), scan, cfg.constants.floor)
    constants = bd.calibrate(members, "lt", constants, scan, cfg.constants.floor)
    art = RunArtifact(verb="calibrate", config_hash=cfg_hash)
    rows = sorted(constants.as_dict().items())
    art.files["constants.csv"] = _csv("calibrate", cfg_hash, "name,value", rows)
    art.summary = {"constants": constants.as_dict(), "mode": mode, "family_size": len(members)}
    return art


def verify_run(cfg: ExperimentConfig) -> RunArtifact:
    """Full pipeline: solve, bounds, dominance checks, gap check, scaling check."""
    cfg_hash = config_hash(cfg)
    geom = cfg.geometry.build()
    potential = cfg.potential.build(geom.d)
    mode = "straight" if geom.is_straight else "curved"

    if cfg.constants.mode == "calibrate":
        members = _family_members(cfg, geom, potential, mode)
        constants = bd.calibrate(members, mode, cfg.constants.build(),
                                 tuple(cfg.constants.scan), cfg.constants.floor)
        constants = bd.calibrate(members, "lt", constants, tuple(cfg.constants.scan),
                                 cfg.constants.floor)
    else:
        constants = cfg.constants.build()

    art = RunArtifact(verb="verify", config_hash=cfg_hash)
    try:
        spectral, convergence, finest = _spectral_rows(cfg, geom, potential)
    except WgBoundsError as exc:
        partial = getattr(exc, "partial_rows", None)
        if partial is not None:
            art.files["spectral.csv"] = _csv(
                "verify", cfg_hash, "alpha,S,nx,ny,count,negative_sum,lowest_eig", partial
            )
            exc.partial_artifact = art
        raise
    rows, summary_rows, reports = _bound_rows(cfg, geom, potential, constants)

    verify_rows = []
    dominance_ok = True
    trusted = True
    for alpha in cfg.potential.alphas:
        res, drift = finest[alpha]
        rep = reports[alpha]
        rhs = rep.curved_rhs if mode == "curved" else rep.straight_rhs
        lt_rhs = rep.lt_rhs
        clr_ok = rhs >= res.count
        lt_ok = lt_rhs >= res.negative_sum or math.isclose(lt_rhs, res.negative_sum, rel_tol=1e-12)
        dominance_ok = dominance_ok and clr_ok and lt_ok
        if not math.isnan(drift):
            trusted = trusted and drift <= cfg.convergence_gate
        verify_rows.append((alpha, res.count, rhs, clr_ok, res.negative_sum, lt_rhs, lt_ok))

    gap = projected_gap_check(
        geom.d,
        Grid2D(S=min(cfg.grid.S, 4.0), d=geom.d, nx=129, ny=65),
        trials=cfg.gap_trials,
        seed=cfg.seed,
    )

    counts = [finest[a][0].count for a in cfg.potential.alphas]
    monotone = all(b >= a for a, b in zip(counts, counts[1:]))
    scaling_ok = True
    alphas = cfg.potential.alphas
    if len(alphas) >= 2 and counts[-1] > 0 and alphas[-1] >= 2 * alphas[-2] * 0.999:
        r_last = counts[-1] / alphas[-1]
        r_half = counts[-2] / alphas[-2]
        scaling_ok = r_half > 0 and 0.5 <= r_last / r_half <= 2.0

    art.files["spectral.csv"] = _csv(
        "verify", cfg_hash, "alpha,S,nx,ny,count,negative_sum,lowest_eig", spectral
    )
    art.files["convergence.csv"] = _csv(
        "verify", cfg_hash, "alpha,level,nx,ny,count,lowest_eig,drift", convergence
    )
    art.files["bounds.csv"] = _bounds_csv("verify", cfg_hash, rows, summary_rows,
                                          reports[alphas[0]].notes)
    art.files["verify.csv"] = _csv(
        "verify", cfg_hash, "alpha,count,clr_rhs,clr_ok,negative_sum,lt_rhs,lt_ok", verify_rows
    )
    art.files["nminus_vs_alpha.dat"] = _dat(
        "verify", cfg_hash, "alpha nminus", [(a, finest[a][0].count) for a in alphas]
    )
    rhs_col = [(a, reports[a].curved_rhs if mode == "curved" else reports[a].straight_rhs)
               for a in alphas]
    art.files["bound_vs_alpha.dat"] = _dat("verify", cfg_hash, "alpha bound_rhs", rhs_col)
    art.summary = {
        "dominance_ok": dominance_ok,
        "trusted": trusted,
        "counts": counts,
        "monotone_counts": monotone,
        "scaling_ok": scaling_ok,
        "gap_passes": gap.passes,
        "gap_trials": gap.trials,
        "gap_ok": gap.all_passed,
        "constants": constants.as_dict(),
        "ok": dominance_ok and monotone and scaling_ok and gap.all_passed,
    }
    return art


VERBS = {
    "validate": validate_run,
    "solve": solve_run,
    "bounds": bounds_run,
    "verify": verify_run,
    "calibrate": calibrate_run,
}


def run_experiment(cfg: ExperimentConfig, verb: str = "verify") -> RunArtifact:
    """Dispatch a named verb on a validated config."""
    if verb not in VERBS:
        raise WgBoundsError(f"unknown verb {verb!r}")
    return VERBS[verb](cfg)
