"""Geometry checks: Frenet reconstruction, admissibility, ellipticity constants."""

import math

import numpy as np
import pytest
from scipy.integrate import simpson

from wgbounds.errors import InvalidGeometryError, OutOfStripError, SelfIntersectionSuspectedError
from wgbounds.geometry import (
    CurvatureFunction,
    curvature_library,
    ellipticity_constants,
    jacobian,
    reconstruct_curve,
    straight_geometry,
    validate_geometry,
)


def constant_curvature(value, s_max=1.0, samples=201):
    return curvature_library("constant", {"value": value, "s_max": s_max, "samples": samples})


def test_straight_line_reconstruction():
    curve = reconstruct_curve(constant_curvature(0.0, s_max=2.0), step=0.01)
    expected = np.column_stack([curve.s, np.zeros_like(curve.s)])
    assert np.allclose(curve.points, expected, atol=1e-12)
    assert np.allclose(curve.normal, [0.0, 1.0], atol=1e-12)


def test_circle_reconstruction_matches_analytic():
    # k = c traces a circle of radius 1/c through the origin, centered at (0, 1/c)
    c = 1.0
    curve = reconstruct_curve(constant_curvature(c, s_max=1.0, samples=101), step=1e-3)
    analytic = np.column_stack([np.sin(c * curve.s) / c, (1.0 - np.cos(c * curve.s)) / c])
    end_err = np.linalg.norm(curve.points[-1] - analytic[-1])
    assert end_err < 1e-6
    assert np.linalg.norm(curve.points - analytic, axis=1).max() < 1e-6


def test_bump_total_turning_matches_quadrature():
    curv = curvature_library("gaussian_bump", {"amplitude": 0.7, "width": 0.8, "s_max": 4.0})
    curve = reconstruct_curve(curv, step=0.005)
    angles = np.unwrap(np.arctan2(curve.tangent[:, 1], curve.tangent[:, 0]))
    turning = angles[-1] - angles[0]
    oracle = np.trapz(curv.values, curv.grid)  # same grid as the reconstruction
    assert turning == pytest.approx(oracle, abs=1e-8)


def test_frame_is_orthonormal_and_reproduces_curvature():
    curv = curvature_library("sech_bump", {"amplitude": 0.6, "width": 1.0, "s_max": 3.0, "samples": 301})
    curve = reconstruct_curve(curv, step=0.002)
    assert np.allclose(np.linalg.norm(curve.tangent, axis=1), 1.0, atol=1e-9)
    assert np.allclose(np.einsum("ij,ij->i", curve.tangent, curve.normal), 0.0, atol=1e-12)
    # det(gamma', gamma'') from finite differences of the tangent
    h = curv.spacing
    dT = (curve.tangent[2:] - curve.tangent[:-2]) / (2.0 * h)
    k_rec = curve.tangent[1:-1, 0] * dT[:, 1] - curve.tangent[1:-1, 1] * dT[:, 0]
    assert np.abs(k_rec - curv.values[1:-1]).max() < 5e-4


def test_rk4_order_endpoint_difference():
    curv = curvature_library("gaussian_bump", {"amplitude": 0.9, "width": 0.7, "s_max": 2.0, "samples": 41})
    ref = reconstruct_curve(curv, step=1e-4).points[-1]
    err_h = np.linalg.norm(reconstruct_curve(curv, step=0.02).points[-1] - ref)
    err_h2 = np.linalg.norm(reconstruct_curve(curv, step=0.01).points[-1] - ref)
    assert err_h2 < err_h / 8.0  # fourth order would give 16


def test_assumption_a_pass_and_fail():
    geom = ellipticity_constants(1.0, constant_curvature(0.5))
    assert geom.d * geom.kplus_sup == pytest.approx(0.5)
    report = validate_geometry(geom, strict=False)
    assert report.assumption_ok
    with pytest.raises(InvalidGeometryError):
        ellipticity_constants(1.0, constant_curvature(1.0))
    bad = ellipticity_constants(0.99, constant_curvature(1.0))  # passes at d=0.99
    assert bad.m > 0


def test_self_intersection_suspected_for_long_turn():
    # total turn 15 rad > 2 pi on a narrow strip: the midline loops back
    grid = np.linspace(-10.0, 10.0, 801)
    values = np.where((grid >= 0.0) & (grid <= 10.0), 1.5, 0.0)
    geom = ellipticity_constants(0.2, CurvatureFunction(grid=grid, values=values))
    with pytest.raises(SelfIntersectionSuspectedError):
        validate_geometry(geom, step=0.05)
    report = validate_geometry(geom, step=0.05, strict=False)
    assert report.self_intersection_suspected
    assert report.min_clearance <= 0.2
    # oracle: closing a full circle of radius 1/1.5 brings points at arc
    # separation 2 pi / 1.5 back together
    curve = reconstruct_curve(geom.curvature, step=0.01)
    inside = (curve.s >= 0.5) & (curve.s <= 9.5)
    pts, s = curve.points[inside], curve.s[inside]
    arc = np.abs(s[:, None] - s[None, :])
    dist = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    assert dist[arc > 2 * 0.2].min() < 0.2


def test_gentle_bend_not_flagged():
    geom = ellipticity_constants(0.5, curvature_library("sech_bump", {"amplitude": 0.5, "width": 1.0}))
    report = validate_geometry(geom, step=0.02, strict=False)
    assert report.assumption_ok and not report.self_intersection_suspected
    assert report.min_clearance > 0.5


def test_ellipticity_constants_zero_curvature():
    geom = straight_geometry(1.0)
    assert (geom.m, geom.M, geom.l) == (1.0, 1.0, 1.0)
    assert geom.beta == pytest.approx(0.5)
    assert geom.lambda1_prime == pytest.approx(math.pi ** 2 / 4)
    assert geom.lambda1_star == pytest.approx(math.pi ** 2 / 4)
    assert geom.threshold == pytest.approx(math.pi ** 2 / 4)


def test_ellipticity_constants_sech_and_negative():
    geom = ellipticity_constants(1.0, curvature_library("sech_bump", {"amplitude": 0.5, "width": 1.0}))
    assert geom.kplus_sup == pytest.approx(0.5)
    assert geom.kminus_sup == 0.0
    assert geom.m == pytest.approx(0.5)
    assert geom.M == pytest.approx(2.0)
    assert geom.l == pytest.approx(math.sqrt(2.0))

    geom_n = ellipticity_constants(1.0, constant_curvature(-0.5))
    assert geom_n.kplus_sup == 0.0
    assert geom_n.kminus_sup == pytest.approx(0.5)
    assert geom_n.m == pytest.approx(2.0 / 3.0)
    assert geom_n.M == pytest.approx(1.5)
    assert geom_n.l == pytest.approx(1.5)


def test_m_le_one_le_M_across_families():
    for amp in (0.3, -0.4, 0.8):
        geom = ellipticity_constants(0.9, constant_curvature(amp))
        assert geom.m <= 1.0 <= geom.M
        assert geom.l >= 1.0


def test_beta_quadrature_matches_closed_form():
    for amp in (0.5, -0.5, 0.25):
        geom = ellipticity_constants(1.0, constant_curvature(amp))
        u = np.linspace(0.0, geom.d, 20001)
        quad = simpson(np.sin(math.pi * geom.l * u / (2 * geom.d)) ** 2, x=u)
        assert abs(geom.beta - quad) <= 1e-10 * abs(quad)


def test_jacobian_values_and_sandwich():
    geom = straight_geometry(1.0)
    assert jacobian(geom, 0.3, 0.7) == 1.0

    geom_p = ellipticity_constants(1.0, constant_curvature(0.5))
    assert jacobian(geom_p, 0.0, 1.0) == pytest.approx(0.5)  # lower sandwich edge
    geom_m = ellipticity_constants(1.0, constant_curvature(-0.5))
    assert jacobian(geom_m, 0.0, 1.0) == pytest.approx(1.5)  # upper sandwich edge

    rng = np.random.default_rng(7)
    geom_b = ellipticity_constants(0.8, curvature_library("sech_bump", {"amplitude": 0.9, "width": 0.5}))
    s = rng.uniform(-4, 4, 500)
    u = rng.uniform(0, geom_b.d, 500)
    vals = jacobian(geom_b, s, u)
    assert np.all(vals >= 1 - geom_b.d * geom_b.kplus_sup - 1e-12)
    assert np.all(vals <= 1 + geom_b.d * geom_b.kminus_sup + 1e-12)

    with pytest.raises(OutOfStripError):
        jacobian(geom_b, 0.0, geom_b.d + 0.1)


def test_curvature_from_file_roundtrip(tmp_path):
    s = np.linspace(-2, 2, 41)
    k = 0.3 * np.exp(-s ** 2)
    path = tmp_path / "curv.txt"
    np.savetxt(path, np.column_stack([s, k]))
    curv = CurvatureFunction.from_file(path)
    assert np.allclose(curv.grid, s)
    assert np.allclose(curv.values, k)
    assert curv(10.0) == 0.0  # zero outside the window
    assert curv(0.5) == pytest.approx(np.interp(0.5, s, k))
