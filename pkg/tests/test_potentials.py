"""Potential families: support boxes, nonnegativity, scaling."""

import numpy as np
import pytest

from wgbounds.errors import InvalidParamsError, UnknownFamilyError
from wgbounds.potentials import potential_library


def test_zero_family():
    v = potential_library("zero", {}, 1.0)
    assert v.is_zero
    assert v(0.3, 0.4) == 0.0
    assert v.l2_norm_squared() == 0.0


def test_square_well():
    v = potential_library("square_well_x", {"V0": 1.0, "a": 1.0}, 1.0)
    assert v(0.0, 0.5) == 1.0
    assert v(0.999, 0.1) == 1.0
    assert v(1.5, 0.5) == 0.0
    assert (v.x_lo, v.x_hi) == (-1.0, 1.0)


def test_gaussian_support_and_peak():
    v = potential_library("gaussian", {"A": 5.0, "sigma": 1.0, "cx": 0.0, "cy": 0.5}, 1.0)
    assert v(0.0, 0.5) == pytest.approx(5.0)
    assert v.x_lo == -6.0 and v.x_hi == 6.0
    assert v(6.5, 0.5) == 0.0  # clipped outside the declared box
    rng = np.random.default_rng(0)
    x, y = rng.uniform(-7, 7, 200), rng.uniform(0, 1, 200)
    assert np.all(v(x, y) >= 0.0)


def test_y_band_and_separable():
    v = potential_library("y_band", {"V0": 2.0, "a": 1.0, "y_lo": 0.5, "y_hi": 1.0}, 1.0)
    assert v(0.0, 0.75) == 2.0
    assert v(0.0, 0.25) == 0.0

    s = potential_library("separable", {"A": 1.0, "sigma": 1.0, "profile": "sin2"}, 1.0)
    assert s(0.0, 1.0) == pytest.approx(1.0)  # sin^2(pi/2) = 1 at the Neumann wall
    assert s(0.0, 0.0) == 0.0


def test_scaled_returns_new_potential():
    v = potential_library("square_well_x", {"V0": 1.0, "a": 1.0}, 1.0)
    w = v.scaled(3.0)
    assert w(0.0, 0.5) == 3.0
    assert v(0.0, 0.5) == 1.0  # original untouched
    assert w.scaled(2.0)(0.0, 0.5) == 6.0


def test_l2_norm_squared_against_closed_form():
    v = potential_library("square_well_x", {"V0": 2.0, "a": 1.0}, 1.0)
    # V^2 = 4 on [-1,1] x [0,1]
    assert v.l2_norm_squared() == pytest.approx(8.0, rel=1e-6)


def test_errors():
    with pytest.raises(UnknownFamilyError):
        potential_library("quartic_nonsense", {}, 1.0)
    with pytest.raises(InvalidParamsError):
        potential_library("gaussian", {"A": -1.0}, 1.0)
    with pytest.raises(InvalidParamsError):
        potential_library("gaussian", {"A": 1.0, "bogus": 2.0}, 1.0)
    with pytest.raises(InvalidParamsError):
        potential_library("y_band", {"y_lo": 0.9, "y_hi": 0.5}, 1.0)
