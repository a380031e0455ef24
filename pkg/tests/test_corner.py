import math

import numpy as np
import pytest

from cornergb import catalog
from cornergb.corner import (aw_corner_closed, aw_corner_density, aw_corner_quadrature,
                             corner_frame, corner_integrand, g_curvature, p2b_apply,
                             theta_moments, theta_moments_quadrature, u_curvature)
from cornergb.curvature import eps_contract
from cornergb.errors import NumericalError, SceneError
from cornergb.expr import parse_expression
from cornergb.harness import sample_points
from cornergb.quadrature import corner_region

from conftest import GENERIC_OMEGA
from test_boundary import jet_of

FOUR_PI_SQ = 4 * math.pi ** 2


def corner_points(chart, m, n, count, seed=0):
    return sample_points(chart, corner_region(m, n), count, seed)


def frames(chart, count, omega=None, seed=0):
    out = []
    for m, n in chart.corners():
        out.append(corner_frame(chart, m, n, corner_points(chart, m, n, count, seed), omega))
    return out


def test_flat_box_corner(flat_box):
    chart = flat_box.charts[0]
    (cf,) = frames(chart, 10)
    np.testing.assert_allclose(cf.theta0, math.pi / 2, rtol=1e-15)
    for name in ("IIM", "IIN", "K", "greenM", "greenN"):
        assert np.all(getattr(cf, name) == 0.0), name
    for fn in (u_curvature, g_curvature, corner_integrand, aw_corner_closed,
               aw_corner_quadrature):
        assert np.abs(fn(cf)).max() < 1e-15


def test_flat_box_p2b_on_product_of_normal_coordinates(flat_box):
    chart = flat_box.charts[0]
    (cf,) = frames(chart, 10)
    np.testing.assert_allclose(p2b_apply(cf, jet_of("x3*x4", cf.points)), 2.0, rtol=1e-15)
    assert np.all(p2b_apply(cf, jet_of("3.5", cf.points)) == 0.0)


def test_bidisk_corner_hand_values():
    (cf,) = frames(catalog.flat_bidisk().scene.charts[0], 10)
    np.testing.assert_allclose(cf.theta0, math.pi / 2, rtol=1e-15)
    np.testing.assert_allclose(cf.etaM, 1.0, rtol=1e-14)
    np.testing.assert_allclose(cf.etaN, 1.0, rtol=1e-14)
    np.testing.assert_allclose(cf.K, 0.0, atol=1e-14)
    # trace-free parts have eigenvalues +-1/2 with opposite alignment
    ev = np.linalg.eigvals(np.linalg.solve(cf.k, cf.IIM0))
    np.testing.assert_allclose(np.sort(ev.real, axis=1), np.tile([-0.5, 0.5], (10, 1)),
                               rtol=1e-14)
    np.testing.assert_allclose(cf.IIN0, -cf.IIM0, atol=1e-14)
    np.testing.assert_allclose(u_curvature(cf), 0.5, rtol=1e-14)
    np.testing.assert_allclose(g_curvature(cf), 0.5, rtol=1e-14)
    np.testing.assert_allclose(aw_corner_density(cf, "closed"), 1 / FOUR_PI_SQ, rtol=1e-14)
    np.testing.assert_allclose(aw_corner_density(cf, "quadrature"), 1 / FOUR_PI_SQ, rtol=1e-13)
    np.testing.assert_allclose(corner_integrand(cf), 1 / FOUR_PI_SQ, rtol=1e-14)


def test_hemiball_corner_hand_values():
    (cf,) = frames(catalog.hemiball().scene.charts[0], 10)
    np.testing.assert_allclose(cf.theta0, math.pi / 2, rtol=1e-14)
    np.testing.assert_allclose(cf.etaM, 0.0, atol=1e-13)
    np.testing.assert_allclose(cf.etaN, 2.0, rtol=1e-13)
    np.testing.assert_allclose(cf.K, 1.0, rtol=1e-12)
    np.testing.assert_allclose(u_curvature(cf), math.pi / 2, rtol=1e-12)
    np.testing.assert_allclose(g_curvature(cf), 0.0, atol=1e-12)


@pytest.mark.parametrize("alpha", [math.pi / 3, 0.4, 2.5])
def test_sheared_corner_pure_angle(alpha):
    entry = catalog.sheared_corner(alpha)
    chart = entry.scene.charts[0]
    for cf in frames(chart, 6):
        assert np.abs(cf.K - 1.0).max() < 1e-12
        assert np.abs(g_curvature(cf)).max() < 1e-12
        # U reduces to (pi - theta0) K and the arc length is pi - theta0
        np.testing.assert_allclose(u_curvature(cf), math.pi - cf.theta0, rtol=1e-12)
        np.testing.assert_allclose(aw_corner_quadrature(cf), (math.pi - cf.theta0) / FOUR_PI_SQ,
                                   rtol=1e-12)
    angles = sorted(float(cf.theta0[0]) for cf in frames(chart, 1))
    np.testing.assert_allclose(angles, sorted([alpha, alpha, math.pi - alpha, math.pi - alpha]),
                               rtol=1e-12)


def test_degenerate_angle_refused():
    entry = catalog.sheared_corner(1e-7)
    chart = entry.scene.charts[0]
    m, n = chart.corners()[0]
    with pytest.raises(NumericalError, match="corner angle"):
        corner_frame(chart, m, n, corner_points(chart, m, n, 3))


def test_non_corner_rejected(generic_chart):
    with pytest.raises(SceneError, match="not an M-N corner"):
        corner_frame(generic_chart, (1, "lo"), (0, "hi"), np.full((1, 4), 0.5))


def test_p2b_requires_degree_two(generic_chart):
    (cf,) = frames(generic_chart, 3)
    with pytest.raises(ValueError, match="degree-2"):
        p2b_apply(cf, jet_of("x1", cf.points, degree=1))


@pytest.fixture(scope="module")
def generic_corner_frames(generic_scene):
    chart = generic_scene.charts[0]
    omega = parse_expression(GENERIC_OMEGA)
    return frames(chart, 100) + frames(chart, 100, omega)


def test_density_forms_agree(generic_corner_frames):
    for cf in generic_corner_frames:
        closed = aw_corner_closed(cf)
        assert np.abs(closed - aw_corner_quadrature(cf, 32)).max() < 1e-10
        assert np.abs(closed - corner_integrand(cf)).max() < 1e-9


def test_epsilon_form_of_corner_density(generic_corner_frames):
    # det(k)^-1 eps eps lam lam = 2 det(lam) / det(k) along the outer arc
    from cornergb.corner import theta_rule
    cf = generic_corner_frames[0]
    cot, csc = 1 / np.tan(cf.theta0), 1 / np.sin(cf.theta0)
    L_mu = csc[:, None, None] * cf.IIN - cot[:, None, None] * cf.IIM
    th, _ = theta_rule(cf.theta0, 8)
    detk = np.linalg.det(cf.k)
    for q in range(th.shape[1]):
        c, s = np.cos(th[:, q]), np.sin(th[:, q])
        lam = c[:, None, None] * cf.IIM + s[:, None, None] * L_mu
        eps_form = eps_contract([(lam, 2), (lam, 2)], detk) / 2
        assert np.abs(eps_form - np.linalg.det(lam) / detk).max() < 1e-12


def test_theta_moments_match_quadrature():
    t = np.random.default_rng(11).uniform(0.01, math.pi - 0.01, 100)
    for closed, quad in zip(theta_moments(t), theta_moments_quadrature(t, 32)):
        assert np.abs(closed - quad).max() < 1e-12


def test_unknown_density_rule(generic_corner_frames):
    with pytest.raises(ValueError, match="unknown rule"):
        aw_corner_density(generic_corner_frames[0], rule="simpson")


def _u_law(chart, m, n, pts, omega_text):
    cf = corner_frame(chart, m, n, pts)
    ct = corner_frame(chart, m, n, pts, parse_expression(omega_text))
    e2 = np.exp(2 * jet_of(omega_text, pts).value)
    return e2 * u_curvature(ct) - u_curvature(cf), p2b_apply(cf, jet_of(omega_text, pts))


def test_u_law_and_linearity(generic_chart):
    (m, n), = generic_chart.corners()
    pts = corner_points(generic_chart, m, n, 30, seed=5)
    w, phi = GENERIC_OMEGA, "0.2*cos(x3) - 0.1*x1*x4 + 0.05*x2^3"
    lw, pw = _u_law(generic_chart, m, n, pts, w)
    lp, pp = _u_law(generic_chart, m, n, pts, phi)
    ls, ps = _u_law(generic_chart, m, n, pts, f"{w} + {phi}")
    for lhs, rhs in ((lw, pw), (lp, pp), (ls, ps)):
        assert np.abs(lhs - rhs).max() < 1e-8
    # the left side is additive in the conformal factor, as P2b is linear
    assert np.abs(ls - lw - lp).max() < 1e-8
    assert np.abs(ps - pw - pp).max() < 1e-12


def test_corner_covariance_and_invariants(generic_chart):
    (m, n), = generic_chart.corners()
    pts = corner_points(generic_chart, m, n, 30, seed=6)
    omega = parse_expression(GENERIC_OMEGA)
    cf = corner_frame(generic_chart, m, n, pts)
    ct = corner_frame(generic_chart, m, n, pts, omega)
    w = jet_of(GENERIC_OMEGA, pts).value
    assert np.abs(ct.theta0 - cf.theta0).max() < 1e-12
    assert np.abs(g_curvature(ct) - np.exp(-2 * w) * g_curvature(cf)).max() < 1e-9
    assert np.abs(ct.IIM0 - np.exp(w)[:, None, None] * cf.IIM0).max() < 1e-10
    assert np.abs(ct.IIN0 - np.exp(w)[:, None, None] * cf.IIN0).max() < 1e-10
    u = jet_of("sin(x1 + x2) * x4 + x3^2", pts)
    assert np.abs(p2b_apply(ct, u) - np.exp(-2 * w) * p2b_apply(cf, u)).max() < 1e-8


def test_constant_conformal_factor(generic_chart):
    (m, n), = generic_chart.corners()
    pts = corner_points(generic_chart, m, n, 10, seed=7)
    c = 0.3
    lhs, p2b = _u_law(generic_chart, m, n, pts, repr(c))
    assert np.all(p2b == 0.0)
    assert np.abs(lhs).max() < 1e-12
