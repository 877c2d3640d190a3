"""Nonnegative potentials on the strip and the named test families."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParamsError, UnknownFamilyError


@dataclass(frozen=True)
class Potential:
    """Nonnegative scalar field on the strip with a declared x-support box.

    The field vanishes outside [x_lo, x_hi] x [0, d] by construction; `scale`
    is the semiclassical coupling alpha multiplying the base profile.
    """

    func: Callable
    x_lo: float
    x_hi: float
    d: float
    scale: float = 1.0
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scale <= 0:
            raise InvalidParamsError("scale must be positive")
        if not self.x_hi >= self.x_lo:
            raise InvalidParamsError("empty support box")

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = (x >= self.x_lo) & (x <= self.x_hi)
        vals = self.scale * np.asarray(self.func(x, y), dtype=float) * inside
        return vals if vals.ndim else float(vals)

    def scaled(self, alpha: float) -> "Potential":
        """Same profile with coupling multiplied by alpha."""
        return Potential(
            func=self.func,
            x_lo=self.x_lo,
            x_hi=self.x_hi,
            d=self.d,
            scale=self.scale * float(alpha),
            name=self.name,
            params=dict(self.params),
        )

    @property
    def is_zero(self) -> bool:
        return self.name == "zero"

    def l2_norm_squared(self, nx: int = 801, ny: int = 257) -> float:
        """||V||^2 over the strip in the flat (s, u) measure, by 2-d Simpson."""
        if self.is_zero or self.x_hi == self.x_lo:
            return 0.0
        from .orlicz import quad_weights

        x = np.linspace(self.x_lo, self.x_hi, nx)
        y = np.linspace(0.0, self.d, ny)
        wx = quad_weights(x)
        wy = quad_weights(y)
        xx, yy = np.meshgrid(x, y, indexing="ij")
        v2 = self(xx, yy) ** 2
        return float(wx @ v2 @ wy)


def _gaussian(params, d):
    a = float(params.pop("A", 1.0))
    sigma = float(params.pop("sigma", 1.0))
    cx = float(params.pop("cx", 0.0))
    cy = float(params.pop("cy", d / 2.0))
    if a < 0 or sigma <= 0:
        raise InvalidParamsError("gaussian needs A >= 0 and sigma > 0")
    half = 6.0 * sigma

    def fn(x, y):
        return a * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * sigma ** 2))

    return fn, cx - half, cx + half


def _square_well_x(params, d):
    v0 = float(params.pop("V0", 1.0))
    a = float(params.pop("a", 1.0))
    cx = float(params.pop("cx", 0.0))
    if v0 < 0 or a <= 0:
        raise InvalidParamsError("square well needs V0 >= 0 and a > 0")

    def fn(x, y):
        return v0 * (np.abs(x - cx) <= a) * np.ones_like(y)

    return fn, cx - a, cx + a


def _y_band(params, d):
    v0 = float(params.pop("V0", 1.0))
    a = float(params.pop("a", 1.0))
    cx = float(params.pop("cx", 0.0))
    y_lo = float(params.pop("y_lo", d / 2.0))
    y_hi = float(params.pop("y_hi", d))
    if v0 < 0 or a <= 0 or not (0.0 <= y_lo < y_hi <= d):
        raise InvalidParamsError("y_band needs V0 >= 0, a > 0 and 0 <= y_lo < y_hi <= d")

    def fn(x, y):
        return v0 * (np.abs(x - cx) <= a) * ((y >= y_lo) & (y <= y_hi))

    return fn, cx - a, cx + a


def _separable(params, d):
    """a(x) * b(y) with a gaussian longitudinal factor and a chosen y-profile."""
    a = float(params.pop("A", 1.0))
    sigma = float(params.pop("sigma", 1.0))
    cx = float(params.pop("cx", 0.0))
    profile = str(params.pop("profile", "sin2"))
    if a < 0 or sigma <= 0:
        raise InvalidParamsError("separable needs A >= 0 and sigma > 0")
    half = 6.0 * sigma

    if profile == "sin2":
        def b(y):
            return np.sin(np.pi * y / (2.0 * d)) ** 2
    elif profile == "flat":
        def b(y):
            return np.ones_like(y)
    elif profile == "band":
        y_lo = float(params.pop("y_lo", d / 2.0))
        y_hi = float(params.pop("y_hi", d))
        if not (0.0 <= y_lo < y_hi <= d):
            raise InvalidParamsError("band profile needs 0 <= y_lo < y_hi <= d")

        def b(y):
            return ((y >= y_lo) & (y <= y_hi)).astype(float)
    else:
        raise InvalidParamsError(f"unknown separable profile {profile!r}")

    def fn(x, y):
        return a * np.exp(-((x - cx) ** 2) / (2.0 * sigma ** 2)) * b(y)

    return fn, cx - half, cx + half


def _zero(params, d):
    def fn(x, y):
        return np.zeros(np.broadcast(x, y).shape)

    return fn, 0.0, 0.0


_FAMILIES = {
    "zero": _zero,
    "gaussian": _gaussian,
    "square_well_x": _square_well_x,
    "y_band": _y_band,
    "separable": _separable,
}

POTENTIAL_FAMILIES = tuple(sorted(_FAMILIES))


def potential_library(name: str, params: dict | None = None, d: float = 1.0) -> Potential:
    """Build a named potential family on a strip of width d."""
    if name not in _FAMILIES:
        raise UnknownFamilyError("potential", name, _FAMILIES)
    given = dict(params or {})
    work = dict(given)
    fn, x_lo, x_hi = _FAMILIES[name](work, d)
    if work:
        raise InvalidParamsError(f"unused potential params: {sorted(work)}")
    return Potential(func=fn, x_lo=x_lo, x_hi=x_hi, d=d, name=name, params=given)
