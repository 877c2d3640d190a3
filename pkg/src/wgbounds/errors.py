"""Exception types shared across the package."""


class WgBoundsError(Exception):
    """Base class for all library errors."""


class InvalidGeometryError(WgBoundsError):
    """Strip geometry violates d*sup(k+) < 1 or is otherwise unusable."""


class SelfIntersectionSuspectedError(WgBoundsError):
    """Sampled midline clearance fell below the strip width (heuristic check)."""


class OutOfStripError(WgBoundsError):
    """Transverse coordinate outside [0, d]."""


class NonfiniteInputError(WgBoundsError):
    """Sampled data contains NaN or infinity."""


class ConvergenceFailureError(WgBoundsError):
    """An iterative oracle stalled before reaching its tolerance."""


class GridTooSmallError(WgBoundsError):
    """Truncation window does not contain the potential or curvature support."""


class EigensolverNonconvergenceError(WgBoundsError):
    """Sparse eigensolver failed to converge; carries achieved residual info."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class CapReachedError(WgBoundsError):
    """Eigenvalue cap hit before the below-threshold set could be certified complete."""

    def __init__(self, message, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class EmptyFamilyError(WgBoundsError):
    """Calibration called with no family members."""


class ConfigError(WgBoundsError):
    """Configuration file failed to parse or validate."""


class UnknownFamilyError(ConfigError):
    """A named potential or curvature family does not exist."""

    def __init__(self, kind, name, known):
        super().__init__(f"unknown {kind} family {name!r}; known: {sorted(known)}")
        self.kind = kind
        self.name = name


class InvalidParamsError(ConfigError):
    """Family parameters outside their documented ranges."""
