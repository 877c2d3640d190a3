"""Bound ingredients: effective potentials, dyadic/Orlicz coefficients, calibration."""

import math
import random

import numpy as np
import pytest

from wgbounds.bounds import (
    BoundConstants,
    DyadicScheme,
    FamilyMember,
    bound_report,
    calibrate,
    calibrate_clr,
    calibrate_lt,
    clr_bound,
    dyadic_coefficients,
    effective_potential_hat,
    effective_potential_star,
    lt_bound,
    orlicz_coefficients,
)
from wgbounds.errors import EmptyFamilyError
from wgbounds.geometry import curvature_library, ellipticity_constants, straight_geometry
from wgbounds.orlicz import SampledFunction1D, phi_inv
from wgbounds.potentials import potential_library

PHI_INV_1 = 1.1461932206205825


def test_dyadic_scheme_tiles_the_line():
    scheme = DyadicScheme.for_support(8.0, -3.0, 5.0)
    assert 2 ** scheme.K >= 8.0
    intervals = [scheme.interval(k) for k in scheme.k_indices]
    intervals.sort()
    assert intervals[0][0] == -(2.0 ** scheme.K)
    assert intervals[-1][1] == 2.0 ** scheme.K
    for (a0, b0), (a1, b1) in zip(intervals, intervals[1:]):
        assert b0 == a1  # adjacent, no interior overlap
    js = [scheme.unit_interval(j) for j in scheme.j_indices]
    assert js[0][0] <= -3.0 and js[-1][1] >= 5.0


def test_effective_potential_hat_examples():
    d = 1.0
    x = np.linspace(-3, 3, 601)

    well = potential_library("square_well_x", {"V0": 2.0, "a": 1.0}, d)
    vhat = well_hat = effective_potential_hat(well, d, x)
    inside = np.abs(x) <= 0.99
    assert np.allclose(vhat.values[inside], 2.0, rtol=1e-9)  # y-independent: Vhat = V(x)

    band = potential_library("y_band", {"V0": 1.0, "a": 1.0, "y_lo": 0.5, "y_hi": 1.0}, d)
    bhat = effective_potential_hat(band, d, x, ny=257)
    assert bhat.values[300] == pytest.approx(0.5 + 1.0 / math.pi, abs=2e-3)

    # thin band hugging the Dirichlet wall: sin^2 kills it
    prev = math.inf
    for width in (0.2, 0.1, 0.05):
        thin = potential_library("y_band", {"V0": 1.0, "a": 1.0, "y_lo": 0.0, "y_hi": width}, d)
        val = effective_potential_hat(thin, d, x, ny=1025).values[300]
        assert val < prev
        prev = val
    assert prev < 2e-3


def test_effective_potential_star_reductions():
    d = 1.0
    x = np.linspace(-3, 3, 301)
    well = potential_library("square_well_x", {"V0": 1.5, "a": 1.0}, d)

    geom0 = straight_geometry(d)
    vhat = effective_potential_hat(well, d, x)
    vstar = effective_potential_star(well, geom0, x)
    assert np.allclose(vstar.values, vhat.values, rtol=1e-12)

    geom = ellipticity_constants(d, curvature_library("sech_bump", {"amplitude": 0.5, "width": 1.0}))
    assert geom.l == pytest.approx(math.sqrt(2.0))
    vstar_c = effective_potential_star(well, geom, x)
    inside = np.abs(x) <= 0.99
    # u-independent potential: V_* = l^2 V(s), the beta factors cancel
    assert np.allclose(vstar_c.values[inside], geom.l ** 2 * 1.5, rtol=1e-9)


def test_dyadic_coefficients_examples():
    scheme = DyadicScheme.for_support(8.0)
    zero = SampledFunction1D(grid=np.linspace(-1, 1, 33), values=np.zeros(33))
    assert all(v == 0.0 for v in dyadic_coefficients(zero, scheme).values())

    on_i0 = SampledFunction1D(grid=np.linspace(-1, 1, 33), values=np.ones(33))
    beta = dyadic_coefficients(on_i0, scheme)
    assert beta[0] == pytest.approx(2.0, abs=1e-14)
    assert all(beta[k] == 0.0 for k in scheme.k_indices if k != 0)

    on_12 = SampledFunction1D(grid=np.linspace(1, 2, 65), values=np.ones(65))
    beta = dyadic_coefficients(on_12, scheme)
    assert beta[1] == pytest.approx(1.5, abs=1e-12)  # int_1^2 x dx
    assert beta[0] == 0.0 and beta[2] == 0.0

    mirrored = SampledFunction1D(grid=np.linspace(-2, -1, 65), values=np.ones(65))
    beta = dyadic_coefficients(mirrored, scheme)
    assert beta[-1] == pytest.approx(1.5, abs=1e-12)  # |x| weight on the mirror interval


def test_orlicz_coefficients_examples():
    d = 1.0
    scheme = DyadicScheme.for_support(4.0)
    zero = potential_library("zero", {}, d)
    assert all(v == 0.0 for v in orlicz_coefficients(zero, d, scheme).values())

    scheme = DyadicScheme.for_support(4.0, -1.0, 2.0)
    on_j0 = potential_library("y_band", {"V0": 1.0, "a": 0.5, "cx": 0.5, "y_lo": 0.0, "y_hi": 1.0}, d)
    coeffs = orlicz_coefficients(on_j0, d, scheme)
    assert coeffs[0] == pytest.approx(phi_inv(1.0), rel=1e-8)
    assert coeffs[1] == 0.0 and coeffs[-1] == 0.0  # outside the support

    doubled = orlicz_coefficients(on_j0.scaled(2.0), d, scheme)
    for j in coeffs:
        assert doubled[j] == pytest.approx(2.0 * coeffs[j], rel=1e-8)


def test_clr_bound_arithmetic():
    bc = BoundConstants(c4=1.0, c5=1.0, c6=2.0)
    assert clr_bound({}, {}, bc, "straight") == 1.0
    assert clr_bound({0: 0.5, 1: 0.9}, {0: 0.3}, bc, "straight") == 1.0  # all filtered
    assert clr_bound({0: 4.0}, {0: 3.0}, bc, "straight") == pytest.approx(11.0)
    bc2 = BoundConstants(c11=1.0, c12=1.0, c13=2.0)
    assert clr_bound({0: 4.0}, {0: 3.0}, bc2, "curved") == pytest.approx(11.0)


def test_lt_bound_scaling_and_reduction():
    d = 1.0
    bc = BoundConstants(c16=0.5)
    zero = potential_library("zero", {}, d)
    assert lt_bound(zero, None, bc) == 0.0

    pot = potential_library("gaussian", {"A": 1.0, "sigma": 0.8}, d)
    base = lt_bound(pot, None, bc)
    assert lt_bound(pot.scaled(3.0), None, bc) == pytest.approx(9.0 * base, rel=1e-12)

    geom0 = straight_geometry(d)
    assert bc.c17(geom0) == bc.c16  # zero curvature: C17 = C16 exactly
    geom = ellipticity_constants(d, curvature_library("sech_bump", {"amplitude": 0.5, "width": 1.0}))
    expected = bc.c16 * (1 - 0.5) ** 2 / geom.M ** 2
    assert bc.c17(geom) == pytest.approx(expected, rel=1e-12)


def test_coefficients_scale_linearly_and_bound_terms_split():
    d = 1.0
    pot = potential_library("gaussian", {"A": 1.0, "sigma": 1.0}, d)
    scheme = DyadicScheme.for_support(8.0, pot.x_lo, pot.x_hi)
    x = np.linspace(-8, 8, 801)
    alpha = 4.0

    beta1 = dyadic_coefficients(effective_potential_hat(pot, d, x), scheme)
    beta_a = dyadic_coefficients(effective_potential_hat(pot.scaled(alpha), d, x), scheme)
    for k in beta1:
        assert beta_a[k] == pytest.approx(alpha * beta1[k], rel=1e-9, abs=1e-300)

    c1 = orlicz_coefficients(pot, d, scheme)
    c_a = orlicz_coefficients(pot.scaled(alpha), d, scheme)
    for j in c1:
        assert c_a[j] == pytest.approx(alpha * c1[j], rel=1e-7, abs=1e-300)

    # with thresholds below every coefficient, the two terms scale as
    # sqrt(alpha) and alpha respectively
    tiny = BoundConstants(c4=1e-12, c5=1e-12, c6=1.0)
    dy1 = clr_bound(beta1, {}, tiny) - 1.0
    dya = clr_bound(beta_a, {}, tiny) - 1.0
    assert dya == pytest.approx(math.sqrt(alpha) * dy1, rel=1e-7)
    or1 = clr_bound({}, c1, tiny) - 1.0
    ora = clr_bound({}, c_a, tiny) - 1.0
    assert ora == pytest.approx(alpha * or1, rel=1e-7)


def test_zero_curvature_reduction_of_report():
    d = 1.0
    pot = potential_library("gaussian", {"A": 2.0, "sigma": 0.8}, d)
    geom = ellipticity_constants(d, curvature_library("zero", {"s_max": 2.0, "samples": 9}))
    # force the curved branch by treating the zero curvature as curved input
    x = np.linspace(-8, 8, 801)
    scheme = DyadicScheme.for_support(8.0, pot.x_lo, pot.x_hi)
    beta = dyadic_coefficients(effective_potential_hat(pot, d, x), scheme)
    gamma = dyadic_coefficients(effective_potential_star(pot, geom, x), scheme)
    for k in beta:
        assert gamma[k] == pytest.approx(beta[k], rel=1e-12, abs=1e-300)


def test_bound_report_structure():
    d = 1.0
    pot = potential_library("gaussian", {"A": 2.0, "sigma": 0.8}, d)
    geom = ellipticity_constants(d, curvature_library("sech_bump", {"amplitude": 0.4, "width": 1.0}))
    rep = bound_report(pot, geom, 8.0, BoundConstants())
    assert rep.straight_rhs >= 1.0 and rep.curved_rhs >= 1.0
    assert rep.lt_rhs >= 0.0
    assert rep.orlicz_d == rep.orlicz_c
    # coefficients vanish on dyadic intervals beyond the support window
    support_hi = pot.x_hi
    for k in rep.scheme.k_indices:
        a, b = rep.scheme.interval(k)
        if a >= support_hi or b <= pot.x_lo:
            assert rep.beta[k] == 0.0


def make_member(count, negative_sum, dyadic, orlicz, l2=1.0, factor=1.0):
    return FamilyMember(
        dyadic=dyadic, orlicz=orlicz, count=count, negative_sum=negative_sum,
        l2_squared=l2, geometry_factor=factor,
    )


def test_calibrate_zero_family_returns_floor():
    member = make_member(0, 0.0, {0: 0.0}, {0: 0.0}, l2=0.0)
    c4, c5, c6 = calibrate_clr([member], floor=1e-6)
    assert c6 == 1e-6
    assert calibrate_lt([member], floor=1e-6) == 1e-6
    with pytest.raises(EmptyFamilyError):
        calibrate_clr([])


def test_calibrate_dominates_and_grows_with_family():
    m1 = make_member(3, 1.0, {0: 4.0}, {0: 1.0}, l2=2.0)
    m2 = make_member(5, 4.0, {0: 4.0, 1: 9.0}, {0: 2.0}, l2=3.0)
    c4, c5, c6 = calibrate_clr([m1])
    bound1 = clr_bound(m1.dyadic, m1.orlicz, BoundConstants(c4=c4, c5=c5, c6=c6))
    assert bound1 >= m1.count

    c4b, c5b, c6b = calibrate_clr([m1, m2])
    for mem in (m1, m2):
        bound = clr_bound(mem.dyadic, mem.orlicz, BoundConstants(c4=c4b, c5=c5b, c6=c6b))
        assert bound >= mem.count
    assert c6b >= c6  # superset can only push the multiplier up

    c16 = calibrate_lt([m1, m2])
    for mem in (m1, m2):
        assert c16 * mem.geometry_factor * mem.l2_squared >= mem.negative_sum


def test_calibrate_order_independent():
    rng = random.Random(5)
    members = [
        make_member(2 + i, 0.5 * i, {0: 1.0 + i, 1: 0.5 * i}, {0: 0.3 * i + 0.1}, l2=1.0 + i)
        for i in range(6)
    ]
    ref = calibrate_clr(members)
    for _ in range(4):
        shuffled = members[:]
        rng.shuffle(shuffled)
        assert calibrate_clr(shuffled) == ref
    assert calibrate_lt(members) == calibrate_lt(list(reversed(members)))


def test_calibrate_dispatch():
    member = make_member(4, 2.0, {0: 9.0}, {0: 3.0}, l2=2.0)
    base = BoundConstants()
    cs = calibrate([member], "straight", base)
    assert cs.c6 != base.c6 or cs.c4 != base.c4
    cc = calibrate([member], "curved", base)
    assert (cc.c11, cc.c12, cc.c13) == (cs.c4, cs.c5, cs.c6)
    cl = calibrate([member], "lt", base)
    assert cl.c16 == pytest.approx(1.0)
