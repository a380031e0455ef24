"""Interior curvature of a Riemannian 4-manifold from metric jets.

Conventions
-----------
* The Laplacian is the negative (analyst's) one:
  ``lap f = g^ij (d_i d_j f - Gamma^k_ij d_k f)``.
* The fully lowered curvature tensor is ``Rm[i,j,k,l] = <R(d_i, d_j) d_k, d_l>``
  with ``R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``.  Then
  ``Ric_ij = g^kl Rm[i,k,l,j]`` and the round sphere has positive scalar
  curvature.
* Levi-Civita symbols carry ``eps^{1234} = +1``; volume form
  ``sqrt(det g) dx1 ^ ... ^ dx4``.

All routines are vectorized over a leading batch axis ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from . import jets
from .errors import NumericalError
from .jets import Jet, contract, stack

FOUR_PI_SQ = 4.0 * math.pi ** 2


def batched_inverse(a):
    """Inverse of (..., n, n) matrices; long double input is refined by Newton steps."""
    try:
        x = np.linalg.inv(a.astype(np.float64, copy=False))
    except np.linalg.LinAlgError:
        raise NumericalError("singular metric") from None
    if a.dtype == np.float64:
        return x
    x = x.astype(a.dtype)
    two = 2.0 * np.eye(a.shape[-1], dtype=a.dtype)
    for _ in range(3):
        x = x @ (two - a @ x)
    return x


def batched_det(a):
    """Determinant of (n, d, d) matrices in the input precision."""
    if a.dtype == np.float64:
        return np.linalg.det(a)
    d = a.shape[-1]
    total = np.zeros(a.shape[:-2], dtype=a.dtype)
    for p, sign in _signed_perms(d):
        term = sign * a[..., 0, p[0]]
        for i in range(1, d):
            term = term * a[..., i, p[i]]
        total = total + term
    return total


def matrix_inverse(g):
    """Inverse of a batched matrix jet (..., n, n) by a Neumann series."""
    g0 = g.value
    inv0 = batched_inverse(g0)
    if g.degree == 0:
        return Jet(inv0[None], g.nvars, 0)
    delta = Jet(g.c.copy(), g.nvars, g.degree)
    delta.c[0] = 0.0
    x = -contract("nij,njk->nik", inv0, delta) if g0.ndim == 3 else \
        -Jet(np.einsum("ij,cjk->cik", inv0, delta.c), g.nvars, g.degree)
    eye = np.broadcast_to(np.eye(g0.shape[-1]), g0.shape)
    acc = x + eye
    for _ in range(g.degree - 1):
        acc = contract("nij,njk->nik", x, acc) + eye
    return contract("nij,njk->nik", acc, inv0)


@dataclass
class Connection:
    """Levi-Civita connection of a metric jet in the variables ``axes``.

    ``g`` has shape (n, d, d) where matrix index a corresponds to jet
    variable ``axes[a]``.
    """

    g: Jet
    ginv: Jet
    gamma: Jet          # Gamma^i_jk, shape (n, d, d, d)
    axes: tuple

    @property
    def dim(self):
        return len(self.axes)

    def grad(self, f):
        """Coordinate gradient of a scalar jet along ``axes``: shape (n, d)."""
        return stack([f.d(a) for a in self.axes], axis=1)

    def hessian(self, f):
        """Covariant Hessian of a scalar jet: shape (n, d, d)."""
        df = self.grad(f)
        ddf = stack([df.d(a) for a in self.axes], axis=1)
        return ddf - contract("nkij,nk->nij", self.gamma, df)

    def laplacian(self, f):
        return contract("nij,nij->n", self.ginv, self.hessian(f))


def connection(g, axes=(0, 1, 2, 3)):
    axes = tuple(axes)
    # Christoffel symbols lose one degree, so the inverse need not be finer
    ginv = matrix_inverse(g.truncate(g.degree - 1))
    dg = stack([g.d(a) for a in axes], axis=1)              # dg[n,a,b,c] = d_a g_bc
    first = 0.5 * (dg.transpose(0, 2, 1, 3) + dg.transpose(0, 2, 3, 1) - dg)
    gamma = contract("nil,nljk->nijk", ginv, first)
    return Connection(g, ginv, gamma, axes)


def riemann(conn):
    """Fully lowered curvature tensor Rm[n,i,j,k,l] at the base point."""
    gam = conn.gamma
    dgam = np.stack([gam.d(a).value for a in conn.axes], axis=1)  # [n,k,i,l,j] = d_k G^i_lj
    g0 = gam.value
    # R^i_{jkl} = d_k G^i_lj - d_l G^i_kj + G^i_km G^m_lj - G^i_lm G^m_kj
    up = (np.einsum("nkilj->nijkl", dgam) - np.einsum("nlikj->nijkl", dgam)
          + np.einsum("nikm,nmlj->nijkl", g0, g0) - np.einsum("nilm,nmkj->nijkl", g0, g0))
    # Rm_{ijkl} = g_lm R^m_{kij}
    return np.einsum("nlm,nmkij->nijkl", conn.g.value, up)


def ricci_jet(conn):
    """Ricci tensor as a jet, one degree below the Christoffel symbols."""
    gam = conn.gamma
    div = None
    for k, a in enumerate(conn.axes):
        term = gam.d(a)[:, k]
        div = term if div is None else div + term
    trace = Jet(np.einsum("cnkkl->cnl", gam.c), gam.nvars, gam.degree)
    dtrace = stack([trace.d(a) for a in conn.axes], axis=1)       # [n,j,l] = d_j v_l
    gam1 = gam.truncate(gam.degree - 1)
    quad = (contract("nm,nmjl->njl", trace.truncate(gam.degree - 1), gam1)
            - contract("nkjm,nmkl->njl", gam1, gam1))
    return div - dtrace + quad


def scalar_jet(conn, ric):
    return contract("nij,nij->n", conn.ginv, ric)


# Levi-Civita contractions ------------------------------------------------

@lru_cache(maxsize=None)
def _signed_perms(n):
    out = []
    for p in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        out.append((p, -1.0 if inv % 2 else 1.0))
    return out


@lru_cache(maxsize=None)
def _eps_pairs(n):
    """Index arrays for sum over (sigma, tau) of sgn(sigma) sgn(tau) ..."""
    perms = _signed_perms(n)
    I = np.array([p for p, _ in perms for _ in perms]).T
    J = np.array([q for _ in perms for q, _ in perms]).T
    S = np.array([s * t for _, s in perms for _, t in perms])
    return I, J, S


def levi_civita(n):
    eps = np.zeros((n,) * n)
    for p, s in _signed_perms(n):
        eps[p] = s
    return eps


def eps_contract(factors, det, magnitude=False):
    """det^{-1} eps^{i1..in} eps^{j1..jn} prod_f F_f[...] over the given factors.

    ``factors`` is a list of (array, arity): arity 2 arrays are indexed as
    ``A[n, i, j]`` and arity 4 arrays as ``R[n, i_a, i_b, j_a, j_b]``.  The
    factors consume the index slots left to right.  With ``magnitude`` the
    sum of absolute summands is returned as well, a bound on the scale of the
    rounding error.
    """
    n = sum(ar // 2 for _, ar in factors)
    I, J, S = _eps_pairs(n)
    total = np.ones((len(det), len(S)))
    slot = 0
    for arr, arity in factors:
        if arity == 2:
            total = total * arr[:, I[slot], J[slot]]
            slot += 1
        else:
            total = total * arr[:, I[slot], I[slot + 1], J[slot], J[slot + 1]]
            slot += 2
    value = (total @ S) / det
    if magnitude:
        return value, np.abs(total).sum(axis=1) / np.abs(det)
    return value


def eps_identity_residual(ginv, det):
    """max |det(g)^{-1} eps eps - det(g^{i_k j_l})| over all index tuples (dim 4)."""
    eps = levi_civita(4)
    lhs = np.einsum("abcd,efgh->abcdefgh", eps, eps)[None] / det[:, None, None, None, None,
                                                                 None, None, None, None]
    idx = np.indices((4,) * 8).reshape(8, -1)
    sub = ginv[:, idx[:4][:, None, :], idx[4:][None, :, :]]       # (n, 4, 4, 4^8)
    rhs = np.linalg.det(np.moveaxis(sub, -1, 1))
    return np.abs(lhs.reshape(len(det), -1) - rhs).max()


# interior quantities -----------------------------------------------------

@dataclass
class InteriorCurvature:
    g: np.ndarray
    g_inv: np.ndarray
    Gamma: np.ndarray
    Riem: np.ndarray
    Ric: np.ndarray
    R: np.ndarray
    lapR: np.ndarray
    P: np.ndarray
    J: np.ndarray
    W: np.ndarray
    W2: np.ndarray
    Q: np.ndarray
    psi_density: np.ndarray
    integrand: np.ndarray
    volume: np.ndarray
    R_jet: Jet
    conn: Connection

    def as_dict(self):
        return {k: getattr(self, k) for k in
                ("R", "lapR", "J", "W2", "Q", "psi_density", "integrand", "volume")}


def schouten_weyl(Rm, Ric, R, g, ginv):
    P = 0.5 * Ric - (R / 12.0)[:, None, None] * g
    J = np.einsum("nij,nij->n", ginv, P)
    W = Rm - kulkarni(P, g)
    Wup = np.einsum("nia,njb,nkc,nld,nabcd->nijkl", ginv, ginv, ginv, ginv, W, optimize=True)
    W2 = np.einsum("nijkl,nijkl->n", Wup, W)
    return P, J, W, W2


def kulkarni(P, g):
    """P_il g_jk + P_jk g_il - P_ik g_jl - P_jl g_ik."""
    return (np.einsum("nil,njk->nijkl", P, g) + np.einsum("njk,nil->nijkl", P, g)
            - np.einsum("nik,njl->nijkl", P, g) - np.einsum("njl,nik->nijkl", P, g))


def norm2(T, ginv):
    """|T|^2 for a covariant 2-tensor."""
    return np.einsum("nia,njb,nij,nab->n", ginv, ginv, T, T, optimize=True)


def q_curvature(lapR, R, Ric, ginv):
    return (-lapR + R ** 2 - 3.0 * norm2(Ric, ginv)) / 6.0


def pfaffian_density(Rm, det):
    """Coefficient of dv_g in the interior Pfaffian form, by raw eps-contraction."""
    s = eps_contract([(Rm, 4), (Rm, 4)], det)
    return s / (FOUR_PI_SQ * 2 ** 4 * 2)


def pfaffian_closed(W2, P, J, ginv):
    return (W2 / 8.0 - norm2(P, ginv) + J ** 2) / FOUR_PI_SQ


def interior_integrand(W2, Q, lapR):
    return (W2 / 8.0 + Q / 2.0 + lapR / 12.0) / FOUR_PI_SQ


def interior_curvature(g):
    """All pointwise interior quantities from a degree-4 metric jet (n, 4, 4)."""
    if g.degree < 4:
        raise ValueError("interior curvature needs metric jets of degree 4")
    conn = connection(g)
    ric = ricci_jet(conn)
    R = scalar_jet(conn, ric)
    lapR = conn.laplacian(R).value
    g0, ginv0 = g.value, conn.ginv.value
    Rm = riemann(conn)
    Ric0 = ric.value
    R0 = R.value
    P, J, W, W2 = schouten_weyl(Rm, Ric0, R0, g0, ginv0)
    Q = q_curvature(lapR, R0, Ric0, ginv0)
    det = batched_det(g0)
    psi = pfaffian_density(Rm, det)
    return InteriorCurvature(
        g=g0, g_inv=ginv0, Gamma=conn.gamma.value, Riem=Rm, Ric=Ric0, R=R0, lapR=lapR,
        P=P, J=J, W=W, W2=W2, Q=Q, psi_density=psi,
        integrand=interior_integrand(W2, Q, lapR), volume=np.sqrt(det), R_jet=R, conn=conn)


def gauss_bonnet_integrand(ic):
    """Integrand of the interior Gauss-Bonnet term: |W|^2/8 + Q/2."""
    return ic.W2 / 8.0 + ic.Q / 2.0
