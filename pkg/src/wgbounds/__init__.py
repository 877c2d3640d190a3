"""Discrete eigenvalues of 2-d quantum waveguides and their counting/sum bounds.

Core pieces: strip geometry with curvature-derived ellipticity constants
(`geometry`), the exp/log Orlicz norm machinery (`orlicz`), finite-difference
eigensolvers for the straight and curved guides (`solver`), the dyadic and
Orlicz bound ingredients with calibration (`bounds`), and an experiment
harness behind an HTTP service (`experiments`, `service`) with a thin CLI
client (`cli`).
"""

__version__ = "0.1.0"

from .bounds import (
    BoundConstants,
    BoundReport,
    DyadicScheme,
    bound_report,
    calibrate,
    clr_bound,
    dyadic_coefficients,
    effective_potential_hat,
    effective_potential_star,
    lt_bound,
    orlicz_coefficients,
)
from .config import ExperimentConfig, config_hash, load_config, serialize_config
from .geometry import (
    CurvatureFunction,
    EmbeddedCurve,
    StripGeometry,
    curvature_library,
    ellipticity_constants,
    jacobian,
    reconstruct_curve,
    straight_geometry,
    validate_geometry,
)
from .orlicz import (
    EXP_PAIR,
    NFunctionPair,
    SampledFunction1D,
    avg_orlicz_norm,
    brute_force_avg_norm,
    luxemburg_norm,
    mixed_norm,
    phi,
    phi_inv,
    psi,
)
from .potentials import Potential, potential_library
from .solver import (
    Grid2D,
    SpectralResult,
    assemble_curved,
    assemble_straight,
    cell_spectrum,
    curved_form_comparison,
    eigen_below,
    projected_gap_check,
    solve_1d,
    solve_curved,
    solve_straight,
)

__all__ = [name for name in dir() if not name.startswith("_")]
