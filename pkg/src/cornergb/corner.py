"""Geometry of the codimension-two corner where an M face meets an N face.

The corner surface is the coordinate 2-face ``x_a = const, x_b = const`` with
``a`` the axis of the M face and ``b`` the axis of the N face.  Its tangent
coordinates are the two remaining axes in increasing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryFrame, boundary_frame
from .curvature import Connection, batched_inverse, connection, ricci_jet, riemann, scalar_jet
from .errors import NumericalError, SceneError
from .jets import contract
from .scene import inward_sign

FOUR_PI_SQ = 4.0 * math.pi ** 2
TWO_PI_SQ = 2.0 * math.pi ** 2
ANGLE_EPS = 1e-6
MUMEQ_TOL = 1e-10


@dataclass
class CornerFrame:
    """Pointwise corner geometry at a batch of corner points."""

    m_face: tuple               # (axis, side)
    n_face: tuple
    tangential: tuple
    points: np.ndarray
    k: np.ndarray
    k_inv: np.ndarray
    muM: np.ndarray
    muN: np.ndarray
    nuM: np.ndarray
    nuN: np.ndarray
    theta0: np.ndarray
    IIM: np.ndarray
    IIN: np.ndarray
    etaM: np.ndarray
    etaN: np.ndarray
    IIM0: np.ndarray
    IIN0: np.ndarray
    K: np.ndarray
    greenM: np.ndarray
    greenN: np.ndarray
    HM: np.ndarray
    HN: np.ndarray
    Riem_sigma: np.ndarray      # ambient Rm[0,1,0,1] on the corner tangent axes
    bfM: BoundaryFrame
    bfN: BoundaryFrame
    kconn: Connection

    def as_dict(self):
        return {k: getattr(self, k) for k in
                ("theta0", "etaM", "etaN", "K", "greenM", "greenN", "HM", "HN")}


def _conormal(hinv, tang, axis, side):
    """Inward unit normal, within a face, of the slice x_axis = const (4 components)."""
    j = tang.index(axis)
    scale = inward_sign(side) / np.sqrt(hinv[:, j, j])
    nu = np.zeros((len(hinv), 4))
    nu[:, list(tang)] = hinv[:, :, j] * scale[:, None]
    return nu


def corner_frame(chart, m_face, n_face, points, omega=None, g=None):
    """Frame of the corner between faces ``m_face`` and ``n_face`` ((axis, side) pairs)."""
    (a, sa), (b, sb) = m_face, n_face
    if chart.role(a, sa) != "M" or chart.role(b, sb) != "N":
        raise SceneError(f"chart {chart.name!r}: x{a + 1}={sa} / x{b + 1}={sb} is not an "
                         "M-N corner")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if g is None:
        g = chart.metric_jet(points, degree=3, omega=omega)
    _angle_guard(g.value, m_face, n_face, points)
    bfM = boundary_frame(chart, a, sa, points, g=g)
    bfN = boundary_frame(chart, b, sb, points, g=g)
    sig = tuple(i for i in range(4) if i not in (a, b))
    g0 = bfM.g

    muM, muN = bfM.mu, bfN.mu
    cos0 = -np.einsum("ni,nij,nj->n", muM, g0, muN)
    theta0 = np.arccos(np.clip(cos0, -1.0, 1.0))
    bad = (theta0 <= ANGLE_EPS) | (theta0 >= math.pi - ANGLE_EPS)
    if np.any(bad):
        raise NumericalError("corner angle outside (eps, pi - eps)", points[bad])
    nuM = _conormal(bfM.h_inv, bfM.tangential, b, sb)
    nuN = _conormal(bfN.h_inv, bfN.tangential, a, sa)

    csc, cot = 1.0 / np.sin(theta0), 1.0 / np.tan(theta0)
    resid = muM - (csc[:, None] * nuN - cot[:, None] * nuM)
    if np.abs(resid).max(initial=0.0) > MUMEQ_TOL * max(1.0, np.abs(csc).max()):
        raise NumericalError("normal decomposition at the corner failed")

    gam = bfM.conn.gamma.value[:, :, list(sig)][:, :, :, list(sig)]    # Gamma^k_{ab}
    nuM_flat = np.einsum("nij,nj->ni", g0, nuM)
    nuN_flat = np.einsum("nij,nj->ni", g0, nuN)
    IIM = np.einsum("nkab,nk->nab", gam, nuM_flat)
    IIN = np.einsum("nkab,nk->nab", gam, nuN_flat)

    k = g[:, sig][:, :, sig]
    kconn = connection(k, axes=sig)
    Rk = scalar_jet(kconn, ricci_jet(kconn))
    k0, kinv = k.value, kconn.ginv.value
    etaM = np.einsum("nab,nab->n", kinv, IIM)
    etaN = np.einsum("nab,nab->n", kinv, IIN)
    IIM0 = IIM - 0.5 * etaM[:, None, None] * k0
    IIN0 = IIN - 0.5 * etaN[:, None, None] * k0

    greenM = _directional(bfM.H_jet, nuM)
    greenN = _directional(bfN.H_jet, nuN)
    Rfull = riemann(bfM.conn)
    s0, s1 = sig
    return CornerFrame(
        m_face=(a, sa), n_face=(b, sb), tangential=sig, points=points, k=k0, k_inv=kinv,
        muM=muM, muN=muN, nuM=nuM, nuN=nuN, theta0=theta0, IIM=IIM, IIN=IIN,
        etaM=etaM, etaN=etaN, IIM0=IIM0, IIN0=IIN0, K=0.5 * Rk.value,
        greenM=greenM, greenN=greenN, HM=bfM.H, HN=bfN.H,
        Riem_sigma=Rfull[:, s0, s1, s0, s1], bfM=bfM, bfN=bfN, kconn=kconn)


def _angle_guard(g0, m_face, n_face, points):
    """Refuse near-tangential corners before any frame is built."""
    (a, sa), (b, sb) = m_face, n_face
    gi = batched_inverse(g0)
    cos0 = -(inward_sign(sa) * inward_sign(sb) * gi[:, a, b]
             / np.sqrt(gi[:, a, a] * gi[:, b, b]))
    theta0 = np.arccos(np.clip(cos0.astype(np.float64), -1.0, 1.0))
    bad = (theta0 <= ANGLE_EPS) | (theta0 >= math.pi - ANGLE_EPS)
    if np.any(bad):
        raise NumericalError("corner angle outside (eps, pi - eps)", points[bad])


def _directional(f, v):
    """v(f) for a scalar jet f and vectors v (n, 4)."""
    return np.einsum("ni,ni->n", v, np.stack([f.d(i).value for i in range(4)], 1))


def _kdot(kinv, A, B):
    return np.einsum("nac,nbd,nab,ncd->n", kinv, kinv, A, B, optimize=True)


def u_curvature(cf):
    t = cf.theta0
    cot, csc = 1.0 / np.tan(t), 1.0 / np.sin(t)
    return ((math.pi - t) * cf.K - 0.25 * cot * (cf.etaM ** 2 + cf.etaN ** 2)
            + 0.5 * csc * cf.etaM * cf.etaN - (cf.greenM + cf.greenN) / 3.0)


def g_curvature(cf):
    t = cf.theta0
    cot, csc = 1.0 / np.tan(t), 1.0 / np.sin(t)
    nM = _kdot(cf.k_inv, cf.IIM0, cf.IIM0)
    nN = _kdot(cf.k_inv, cf.IIN0, cf.IIN0)
    return 0.5 * cot * (nM + nN) - csc * _kdot(cf.k_inv, cf.IIM0, cf.IIN0)


def p2b_apply(cf, u):
    """Second-order corner operator applied to a scalar jet ``u`` of degree >= 2."""
    if u.degree < 2:
        raise ValueError("p2b_apply needs a degree-2 jet of u")
    t = cf.theta0
    cot, csc = 1.0 / np.tan(t), 1.0 / np.sin(t)
    lap_k = cf.kconn.laplacian(u).value
    grad = cf.bfM.conn.grad(u)
    muM_u = contract("ni,ni->n", cf.bfM.mu_jet, grad)
    muN_u = contract("ni,ni->n", cf.bfN.mu_jet, grad)
    du = grad.value
    nuM_u = np.einsum("ni,ni->n", cf.nuM, du)
    nuN_u = np.einsum("ni,ni->n", cf.nuN, du)
    return ((t - math.pi) * lap_k + _directional(muM_u, cf.nuM) + _directional(muN_u, cf.nuN)
            + cot * (cf.etaM * nuM_u + cf.etaN * nuN_u)
            - csc * (cf.etaN * nuM_u + cf.etaM * nuN_u)
            + (cf.HM * nuM_u + cf.HN * nuN_u) / 3.0)


def corner_integrand(cf):
    """(1/4 pi^2)(U + G + (nu_M H_M + nu_N H_N) / 3)."""
    return (u_curvature(cf) + g_curvature(cf) + (cf.greenM + cf.greenN) / 3.0) / FOUR_PI_SQ


def aw_corner_closed(cf):
    t = cf.theta0
    cot, csc = 1.0 / np.tan(t), 1.0 / np.sin(t)
    nM = _kdot(cf.k_inv, cf.IIM0, cf.IIM0)
    nN = _kdot(cf.k_inv, cf.IIN0, cf.IIN0)
    return ((math.pi - t) * cf.K - 0.25 * cot * (cf.etaM ** 2 + cf.etaN ** 2)
            + 0.5 * csc * cf.etaM * cf.etaN + 0.5 * cot * (nM + nN)
            - csc * _kdot(cf.k_inv, cf.IIM0, cf.IIN0)) / FOUR_PI_SQ


def theta_rule(theta0, order=32):
    """Gauss-Legendre nodes/weights on the outer-angle arc (theta0 + pi/2, 3 pi/2)."""
    x, w = np.polynomial.legendre.leggauss(order)
    lo = np.asarray(theta0) + 0.5 * math.pi
    half = 0.5 * (1.5 * math.pi - lo)
    mid = lo + half
    return mid[..., None] + half[..., None] * x, half[..., None] * w


def aw_corner_quadrature(cf, order=32):
    """Outer-angle integral of the corner density, by 1D quadrature.

    The second fundamental form of the corner surface along
    ``xi = cos(t) nu_M + sin(t) mu_M`` uses ``mu_M = csc nu_N - cot nu_M``,
    so ``L(mu_M) = csc II_N - cot II_M``.
    """
    t0 = cf.theta0
    cot, csc = 1.0 / np.tan(t0), 1.0 / np.sin(t0)
    L_mu = csc[:, None, None] * cf.IIN - cot[:, None, None] * cf.IIM
    th, w = theta_rule(t0, order)
    c, s = np.cos(th), np.sin(th)
    lam = c[:, :, None, None] * cf.IIM[:, None] + s[:, :, None, None] * L_mu[:, None]
    detk = np.linalg.det(cf.k)
    # Phi20 = det(lam) / det(k); Phi21 = -Rm_{0101} / det(k)
    phi20 = np.linalg.det(lam) / detk[:, None]
    phi21 = -cf.Riem_sigma / detk
    f = (phi20 + 0.5 * phi21[:, None]) / TWO_PI_SQ
    return np.einsum("nq,nq->n", f, w)


def aw_corner_density(cf, rule="closed", order=32):
    if rule == "closed":
        return aw_corner_closed(cf)
    if rule == "quadrature":
        return aw_corner_quadrature(cf, order)
    raise ValueError(f"unknown rule {rule!r}")


def theta_moments(theta0):
    """Closed forms of the integrals of cos^2, sin^2 and sin*cos over the outer arc."""
    t = np.asarray(theta0, dtype=float)
    return (0.5 * (math.pi - t) + 0.25 * np.sin(2 * t),
            0.5 * (math.pi - t) - 0.25 * np.sin(2 * t),
            0.25 - 0.25 * np.cos(2 * t))


def theta_moments_quadrature(theta0, order=32):
    th, w = theta_rule(np.asarray(theta0, dtype=float), order)
    c, s = np.cos(th), np.sin(th)
    return ((c * c * w).sum(-1), (s * s * w).sum(-1), (s * c * w).sum(-1))


def corner_length(cf):
    return np.sqrt(np.linalg.det(cf.k))
