"""Geometry of the boundary hypersurfaces: frames, T, the L-curvature, P3 and
the Allendoerfer-Weil boundary density.

A face is a coordinate slice ``x_axis = const`` of a chart.  Face fields are
built on the foliation by parallel slices, so every field is a full
four-variable jet; only tangential derivatives are ever read from fields
that live on the face alone.

The second fundamental form is ``L(X, Y) = <nabla_X Y, mu>`` with ``mu`` the
inward unit normal, so the unit sphere bounding the unit ball has ``L = h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import jets
from .curvature import (Connection, connection, eps_contract, ricci_jet, riemann,
                        scalar_jet)
from .errors import NumericalError, SceneError
from .jets import Jet, contract
from .scene import inward_sign

TWO_PI_SQ = 2.0 * math.pi ** 2
FOUR_PI_SQ = 4.0 * math.pi ** 2
ORACLE_TOL = 1e-10


@dataclass
class BoundaryFrame:
    """Pointwise boundary geometry at a batch of face points.

    Array fields carry a leading batch axis.  Tangential tensors use the
    face's three tangential coordinates in increasing order (``tangential``).
    """

    axis: int
    side: str
    role: str
    tangential: tuple
    points: np.ndarray
    g: np.ndarray
    h: np.ndarray
    h_inv: np.ndarray
    mu: np.ndarray              # inward unit normal, vector components
    mu_flat: np.ndarray         # the same, covector components
    L: np.ndarray
    H: np.ndarray
    L0: np.ndarray
    L0_2: np.ndarray
    L0_3: np.ndarray
    Rh: np.ndarray
    Rich: np.ndarray
    lap_h_H: np.ndarray
    grad_H: np.ndarray
    muR: np.ndarray
    R_g: np.ndarray
    Ric_g_restricted: np.ndarray
    Riem_tangential: np.ndarray
    conn: Connection
    hconn: Connection
    mu_jet: Jet
    H_jet: Jet
    L_jet: Jet

    def as_dict(self):
        return {k: getattr(self, k) for k in
                ("H", "L0_2", "L0_3", "Rh", "lap_h_H", "muR", "R_g")}


def unit_normal(ginv, axis, side):
    """Inward unit normal (vector, covector scale) of the slice x_axis = const.

    ``ginv`` may be a Jet or an array of shape (n, 4, 4).
    """
    s = inward_sign(side)
    gaa = ginv[:, axis, axis]
    if isinstance(gaa, Jet):
        scale = jets.power(gaa, -0.5) * s
        return ginv[:, :, axis] * scale[:, None], scale
    scale = s / np.sqrt(gaa)
    return ginv[:, :, axis] * scale[:, None], scale


def boundary_frame(chart, axis, side, points, omega=None, g=None):
    """Build the frame of face ``x_axis = side`` at ``points`` (n, 4).

    ``g`` may supply a precomputed metric jet of degree >= 3.
    """
    role = chart.role(axis, side)
    if role not in ("M", "N"):
        raise SceneError(f"face x{axis + 1}={side} of chart {chart.name!r} has role "
                         f"{role!r}, not M or N")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if g is None:
        g = chart.metric_jet(points, degree=3, omega=omega)
    if g.degree < 3:
        raise ValueError("boundary frames need metric jets of degree 3")
    t = tuple(i for i in range(4) if i != axis)
    conn = connection(g)
    ric = ricci_jet(conn)
    R = scalar_jet(conn, ric)
    mu_jet, scale = unit_normal(conn.ginv, axis, side)
    gam_a = conn.gamma[:, axis]
    L = gam_a[:, t][:, :, t] * scale[:, None, None]

    h = g[:, t][:, :, t]
    hconn = connection(h, axes=t)
    ric_h = ricci_jet(hconn)
    Rh = scalar_jet(hconn, ric_h)
    H = contract("nab,nab->n", hconn.ginv, L)
    hinv0 = hconn.ginv.value
    h0 = h.value
    L0v = L.value
    H0 = H.value
    L0 = L0v - (H0 / 3.0)[:, None, None] * h0
    A = np.einsum("nab,nbc->nac", hinv0, L0)
    L0_2 = np.einsum("nab,nba->n", A, A)
    L0_3 = np.einsum("nab,nbc,nca->n", A, A, A)
    muR = np.einsum("ni,ni->n", mu_jet.value, np.stack([R.d(i).value for i in range(4)], 1))

    mu0 = mu_jet.value
    mu_flat = np.zeros_like(mu0)
    mu_flat[:, axis] = scale.value
    g0 = g.value
    check_normal(g0, mu0, axis, t)
    Rm = riemann(conn)
    return BoundaryFrame(
        axis=axis, side=side, role=role, tangential=t, points=points,
        g=g0, h=h0, h_inv=hinv0, mu=mu0, mu_flat=mu_flat, L=L0v, H=H0, L0=L0,
        L0_2=L0_2, L0_3=L0_3, Rh=Rh.value, Rich=ric_h.value,
        lap_h_H=hconn.laplacian(H).value, grad_H=hconn.grad(H).value, muR=muR,
        R_g=R.value, Ric_g_restricted=ric.value[:, t][:, :, t],
        Riem_tangential=Rm[np.ix_(range(len(points)), t, t, t, t)],
        conn=conn, hconn=hconn, mu_jet=mu_jet, H_jet=H, L_jet=L)


def check_normal(g0, mu, axis, t, tol=1e-12):
    gm = np.einsum("nij,nj->ni", g0, mu)
    unit = np.abs(np.einsum("ni,ni->n", gm, mu) - 1.0)
    tang = np.abs(gm[:, list(t)]).max(axis=1) / np.sqrt(np.einsum("nii->n", g0))
    bad = (unit > tol) | (tang > tol) | (np.sign(mu[:, axis]) == 0)
    if np.any(bad):
        raise NumericalError("boundary normal failed the unit/orthogonality check")


def _dot(hinv, A, B):
    return np.einsum("nac,nbd,nab,ncd->n", hinv, hinv, A, B, optimize=True)


def t_curvature(bf):
    L0R = _dot(bf.h_inv, bf.L0, bf.Ric_g_restricted)
    L0Rh = _dot(bf.h_inv, bf.L0, bf.Rich)
    H = bf.H
    return (-bf.muR / 12.0 - L0R + L0Rh - 0.5 * H * bf.L0_2 + 2.0 / 3.0 * bf.L0_3
            + H * bf.Rh / 6.0 - H ** 3 / 27.0 - bf.lap_h_H / 3.0)


def l_curvature(bf):
    L0R = _dot(bf.h_inv, bf.L0, bf.Ric_g_restricted)
    L0Rh = _dot(bf.h_inv, bf.L0, bf.Rich)
    return L0R - 2.0 * L0Rh + 2.0 / 3.0 * bf.H * bf.L0_2 - bf.L0_3


# Coefficients of (Delta_h mu(u), H Delta_h u, L0 . Hess_h u, grad H . grad u).
# "law" is the operator for which exp(3w) T~ = T + P3 w holds; "printed" is the
# commonly quoted form, kept for comparison.
P3_FORMS = {
    "law": (1.0, -1.0 / 3.0, 1.0, 1.0 / 3.0),
    "printed": (-1.0, -1.0, -1.0, -1.0 / 3.0),
}


def p3_apply(bf, u, form="law"):
    """Third-order boundary operator applied to a scalar jet ``u`` of degree >= 3.

    ``P3 u = mu(lap_g u)/2 + a lap_h mu(u) + b H lap_h u + c L0 . hess_h u
    + d <grad_h H, grad_h u> + (R_g/6 - R_h/2 - |L0|^2/2 + H^2/3) mu(u)``
    with ``(a, b, c, d)`` from ``P3_FORMS[form]``.
    """
    if u.degree < 3:
        raise ValueError("p3_apply needs a degree-3 jet of u")
    a, b, c, d = P3_FORMS[form]
    conn, hconn = bf.conn, bf.hconn
    lap_u = conn.laplacian(u)
    mu_lap = np.einsum("ni,ni->n", bf.mu,
                       np.stack([lap_u.d(i).value for i in range(4)], 1))
    mu_u = contract("ni,ni->n", bf.mu_jet, conn.grad(u))
    lap_h_mu_u = hconn.laplacian(mu_u).value
    hess_h = hconn.hessian(u).value
    lap_h_u = np.einsum("nab,nab->n", bf.h_inv, hess_h)
    L0_hess = _dot(bf.h_inv, bf.L0, hess_h)
    grad_h_u = hconn.grad(u).value
    dH_du = np.einsum("nab,na,nb->n", bf.h_inv, bf.grad_H, grad_h_u)
    coef = bf.R_g / 6.0 - bf.Rh / 2.0 - bf.L0_2 / 2.0 + bf.H ** 2 / 3.0
    return (0.5 * mu_lap + a * lap_h_mu_u + b * bf.H * lap_h_u + c * L0_hess
            + d * dH_du + coef * mu_u.value)


def boundary_integrand(bf):
    """(1/4 pi^2)(T + L-curvature + Delta_h H / 3 + mu(R) / 12)."""
    return (t_curvature(bf) + l_curvature(bf) + bf.lap_h_H / 3.0 + bf.muR / 12.0) / FOUR_PI_SQ


def aw_boundary_closed(bf):
    """Closed-form boundary density at the outer normal xi = -mu."""
    L0x, Hx = -bf.L0, -bf.H
    return (0.5 * _dot(bf.h_inv, L0x, bf.Rich) - Hx * bf.Rh / 12.0 - Hx * bf.L0_2 / 12.0
            + Hx ** 3 / 54.0 - bf.L0_3 / 6.0) / TWO_PI_SQ


def aw_boundary_raw(bf, magnitude=False):
    """The same density from the antisymmetrized curvature forms.

    With ``Lam = -L(xi) = L(mu)``:
    ``Phi30 = det(h)^-1 eps eps Lam Lam Lam / 6`` and
    ``Phi31 = -det(h)^-1 eps eps Rm Lam / 4`` (ambient curvature,
    tangential indices), combined as ``(Phi30 + Phi31 / 2) / (2 pi^2)``.
    """
    det = np.linalg.det(bf.h)
    lam = bf.L
    phi30, m30 = eps_contract([(lam, 2), (lam, 2), (lam, 2)], det, magnitude=True)
    phi31, m31 = eps_contract([(bf.Riem_tangential, 4), (lam, 2)], det, magnitude=True)
    value = (phi30 / 6.0 - phi31 / 8.0) / TWO_PI_SQ
    if magnitude:
        return value, (m30 / 6.0 + m31 / 8.0) / TWO_PI_SQ
    return value


def oracle_tolerance(h, magnitude):
    """1e-10 relative agreement plus a round-off allowance growing with cond(h).

    Near coordinate axes the induced metric is badly conditioned and both
    forms lose accuracy at the rate eps * cond(h).
    """
    ev = np.linalg.eigvalsh(h)
    cond = ev[:, -1] / ev[:, 0]
    scale = np.maximum(1.0, magnitude)
    return (ORACLE_TOL + 64.0 * np.finfo(float).eps * cond) * scale


def aw_boundary_density(bf, check=True):
    closed = aw_boundary_closed(bf)
    if check:
        raw, mag = aw_boundary_raw(bf, magnitude=True)
        tol = oracle_tolerance(bf.h, mag)
        bad = np.abs(raw - closed) > tol
        if np.any(bad):
            raise NumericalError("boundary density: closed form and raw contraction disagree",
                                 bf.points[bad])
    return closed


def face_volume(bf):
    return np.sqrt(np.linalg.det(bf.h))
