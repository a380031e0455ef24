"""Truncated multivariate Taylor series ("jets").

A :class:`Jet` stores the Taylor coefficients of a field about a base point
in up to four variables, truncated at a fixed total degree.  Coefficients
live on the leading axis of a numpy array; the remaining axes are an
arbitrary tensor/batch shape, so one Jet can carry a whole 4x4 metric over
thousands of quadrature nodes at once.

Monomials are stored in graded order (all degree-0 terms, then degree 1,
...), which makes truncation to a lower degree a prefix slice.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numba
import numpy as np

MAX_VARS = 4


class JetDomainError(ValueError):
    """Raised when a function is applied outside its domain at the base point."""


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def monomials(nvars, degree):
    """Multi-indices with total degree <= ``degree``, in graded order."""
    out = []
    for d in range(degree + 1):
        out.extend(_compositions(d, nvars))
    return tuple(out)


def ncoef(nvars, degree):
    return math.comb(nvars + degree, degree)


@lru_cache(maxsize=None)
def _index(nvars, degree):
    return {m: i for i, m in enumerate(monomials(nvars, degree))}


@lru_cache(maxsize=None)
def _pair_table(nvars, degree):
    """Index triples (left, right, result) of every monomial pair that survives truncation."""
    mons = monomials(nvars, degree)
    index = _index(nvars, degree)
    ia, ib, ic = [], [], []
    for a, ma in enumerate(mons):
        for b in range(ncoef(nvars, degree - sum(ma))):
            ia.append(a)
            ib.append(b)
            ic.append(index[tuple(x + y for x, y in zip(ma, mons[b]))])
    return tuple(np.array(v, dtype=np.int64) for v in (ia, ib, ic))


@numba.njit(cache=True)
def _pair_kernel(X, Y, ia, ib, ic, nout):
    # X: (coef, left, sum, batch), Y: (coef, sum, right, batch); batch innermost,
    # processed in cache-sized tiles
    nl, ns, nb = X.shape[1], X.shape[2], X.shape[3]
    nr = Y.shape[2]
    out = np.zeros((nout, nl, nr, nb))
    tile = 128
    tmp = np.empty(tile)
    for t0 in range(0, nb, tile):
        t1 = min(t0 + tile, nb)
        w = t1 - t0
        for p in range(ia.shape[0]):
            a = ia[p]
            q = ib[p]
            c = ic[p]
            for i in range(nl):
                for j in range(nr):
                    x = X[a, i, 0, t0:t1]
                    y = Y[q, 0, j, t0:t1]
                    for b in range(w):
                        tmp[b] = x[b] * y[b]
                    for k in range(1, ns):
                        x = X[a, i, k, t0:t1]
                        y = Y[q, k, j, t0:t1]
                        for b in range(w):
                            tmp[b] += x[b] * y[b]
                    o = out[c, i, j, t0:t1]
                    for b in range(w):
                        o[b] += tmp[b]
    return out


@lru_cache(maxsize=None)
def _deriv_table(nvars, degree, axis):
    index = _index(nvars, degree)
    src, fac = [], []
    for m in monomials(nvars, degree - 1):
        up = list(m)
        up[axis] += 1
        src.append(index[tuple(up)])
        fac.append(up[axis])
    return np.array(src), np.array(fac, dtype=float)


def _expand(c, ndim):
    """Insert singleton tensor axes so that c has ``ndim`` tensor axes."""
    extra = ndim - (c.ndim - 1)
    if extra <= 0:
        return c
    return c.reshape(c.shape[:1] + (1,) * extra + c.shape[1:])


def as_float(x):
    """Array view in float64, or in long double when the input already is."""
    x = np.asarray(x)
    return x if x.dtype == np.longdouble else x.astype(np.float64, copy=False)


class Jet:
    """Truncated Taylor expansion with coefficient axis first.

    Parameters
    ----------
    coeffs : ndarray
        Shape ``(ncoef(nvars, degree), *shape)``.
    nvars : int
        Number of expansion variables (1..4).
    degree : int
        Truncation degree.
    """

    __slots__ = ("c", "nvars", "degree")
    __array_ufunc__ = None

    def __init__(self, coeffs, nvars, degree):
        if not 1 <= nvars <= MAX_VARS:
            raise ValueError(f"nvars must be in 1..{MAX_VARS}, got {nvars}")
        coeffs = as_float(coeffs)
        if coeffs.shape[0] != ncoef(nvars, degree):
            raise ValueError("coefficient array does not match (nvars, degree)")
        self.c = coeffs
        self.nvars = nvars
        self.degree = degree

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, nvars=4, degree=4):
        value = as_float(value)
        c = np.zeros((ncoef(nvars, degree),) + value.shape, dtype=value.dtype)
        c[0] = value
        return cls(c, nvars, degree)

    @classmethod
    def variable(cls, axis, value, nvars=4, degree=4):
        """Jet of the coordinate function x_axis (0-based) about ``value``."""
        if not 0 <= axis < nvars:
            raise ValueError(f"axis {axis} out of range for {nvars} variables")
        jet = cls.constant(value, nvars, degree)
        if degree >= 1:
            jet.c[1 + axis] = 1.0
        return jet

    # views --------------------------------------------------------------

    @property
    def shape(self):
        return self.c.shape[1:]

    @property
    def value(self):
        return self.c[0]

    @property
    def coeffs(self):
        """Mapping multi-index -> coefficient (scalar jets only)."""
        if self.shape:
            raise ValueError("coeffs mapping is only defined for scalar jets")
        return {m: float(v) for m, v in
                zip(monomials(self.nvars, self.degree), self.c) if v != 0.0}

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.c[(slice(None),) + key], self.nvars, self.degree)

    def transpose(self, *axes):
        return Jet(self.c.transpose((0,) + tuple(a + 1 for a in axes)),
                   self.nvars, self.degree)

    def truncate(self, degree):
        if degree > self.degree:
            raise ValueError("cannot raise the degree of a jet")
        if degree == self.degree:
            return self
        return Jet(self.c[:ncoef(self.nvars, degree)], self.nvars, degree)

    def __repr__(self):
        return f"Jet(nvars={self.nvars}, degree={self.degree}, shape={self.shape})"

    # calculus -----------------------------------------------------------

    def d(self, axis):
        """Partial derivative along variable ``axis`` (0-based); degree drops by one."""
        if self.degree == 0:
            raise ValueError("cannot differentiate a degree-0 jet")
        src, fac = _deriv_table(self.nvars, self.degree, axis)
        fac = fac.reshape((-1,) + (1,) * len(self.shape))
        return Jet(self.c[src] * fac, self.nvars, self.degree - 1)

    def partial(self, alpha):
        """Value of the mixed partial derivative d^alpha at the base point."""
        alpha = tuple(alpha) + (0,) * (self.nvars - len(alpha))
        if len(alpha) != self.nvars:
            raise ValueError("multi-index has too many entries")
        if sum(alpha) > self.degree:
            raise ValueError(f"|alpha|={sum(alpha)} exceeds jet degree {self.degree}")
        scale = math.prod(math.factorial(a) for a in alpha)
        return scale * self.c[_index(self.nvars, self.degree)[alpha]]

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different numbers of variables")
            d = min(self.degree, other.degree)
            return self.truncate(d), other.truncate(d)
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            other = as_float(other)
            shape = np.broadcast_shapes(self.shape, other.shape)
            c = np.array(np.broadcast_to(self.c, self.c.shape[:1] + shape),
                         dtype=np.result_type(self.c, other))
            c[0] += other
            return Jet(c, self.nvars, self.degree)
        a, b = pair
        return Jet(a.c + _expand(b.c, len(a.shape)) if len(a.shape) >= len(b.shape)
                   else _expand(a.c, len(b.shape)) + b.c, a.nvars, a.degree)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.nvars, self.degree)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._coerce(other)
        if pair is None:
            other = as_float(other)
            return Jet(self.c * other, self.nvars, self.degree)
        a, b = pair
        shape = np.broadcast_shapes(a.shape, b.shape)
        A = np.broadcast_to(_expand(a.c, len(shape)), a.c.shape[:1] + shape)
        B = np.broadcast_to(_expand(b.c, len(shape)), b.c.shape[:1] + shape)
        size = math.prod(shape)
        out = _product(A.reshape(len(A), size, 1, 1), B.reshape(len(B), size, 1, 1),
                       a.nvars, a.degree)
        return Jet(out.reshape(out.shape[:1] + shape), a.nvars, a.degree)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / as_float(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        return powi(self, n)

    def reciprocal(self):
        a0 = self.c[0]
        if np.any(a0 == 0.0):
            raise ZeroDivisionError("division by a jet with zero constant term")
        r = 1.0 / a0
        coeffs = [r * (-r) ** k for k in range(self.degree + 1)]
        return _compose(self, coeffs)


def _product(X, Y, nvars, degree):
    """Truncated product of coefficient blocks in matmul form (see ``_pair_kernel``)."""
    n = ncoef(nvars, degree)
    if X.dtype != np.float64 or Y.dtype != np.float64:
        return _product_generic(X[:n], Y[:n], nvars, degree)
    ia, ib, ic = _pair_table(nvars, degree)
    X = np.ascontiguousarray(X[:n].transpose(0, 2, 3, 1), dtype=float)
    Y = np.ascontiguousarray(Y[:n].transpose(0, 2, 3, 1), dtype=float)
    return _pair_kernel(X, Y, ia, ib, ic, n).transpose(0, 3, 1, 2)


@lru_cache(maxsize=None)
def _grouped_pairs(nvars, degree):
    ia, ib, ic = _pair_table(nvars, degree)
    order = np.argsort(ic, kind="stable")
    starts = np.flatnonzero(np.r_[True, np.diff(ic[order]) != 0])
    return ia[order], ib[order], ic[order][starts], starts


def _product_generic(X, Y, nvars, degree):
    """Same contraction as ``_product`` with plain numpy, for extended precision."""
    ia, ib, targets, starts = _grouped_pairs(nvars, degree)
    P = np.matmul(X[ia], Y[ib])
    out = np.zeros((ncoef(nvars, degree),) + P.shape[1:], dtype=P.dtype)
    out[targets] = np.add.reduceat(P, starts, axis=0)
    return out


def contract(subscripts, a, b):
    """``np.einsum`` for two jets (or a jet and a plain array).

    The subscripts describe tensor axes only, e.g. ``'nil,nljk->nijk'``.
    """
    ins, out = subscripts.replace(" ", "").split("->")
    sa, sb = ins.split(",")
    if isinstance(a, Jet) and isinstance(b, Jet):
        a, b = a._coerce(b)
        nvars, degree = a.nvars, a.degree
    else:
        ref = a if isinstance(a, Jet) else b
        nvars, degree = ref.nvars, ref.degree
    nb, nl, nr, ns, perm_a, perm_b, perm_out = _matmul_plan(sa, sb, out)
    x = a.c if isinstance(a, Jet) else as_float(a)[None]
    y = b.c if isinstance(b, Jet) else as_float(b)[None]
    x = x.transpose([0] + perm_a)
    y = y.transpose([0] + perm_b)
    bshape = np.broadcast_shapes(x.shape[1:1 + nb], y.shape[1:1 + nb])
    x = np.broadcast_to(x, x.shape[:1] + bshape + x.shape[1 + nb:])
    y = np.broadcast_to(y, y.shape[:1] + bshape + y.shape[1 + nb:])
    lshape = x.shape[1 + nb:1 + nb + nl]
    rshape = y.shape[1 + nb + ns:]
    sdim = math.prod(x.shape[1 + nb + nl:])
    X = x.reshape((x.shape[0], math.prod(bshape), math.prod(lshape), sdim))
    Y = y.reshape((y.shape[0], math.prod(bshape), sdim, math.prod(rshape)))
    if isinstance(a, Jet) and isinstance(b, Jet):
        R = _product(X, Y, nvars, degree)
    else:
        # one factor is constant: a plain batched matmul per coefficient
        R = np.matmul(X, Y)
    R = R.reshape(R.shape[:1] + bshape + lshape + rshape)
    return Jet(R.transpose(perm_out), nvars, degree)


@lru_cache(maxsize=None)
def _matmul_plan(sa, sb, out):
    """Recast ``<sa>,<sb>-><out>`` as a batched matmul over (batch, left, sum, right)."""
    for s in (sa, sb, out):
        if len(set(s)) != len(s):
            raise ValueError(f"repeated index within one operand: {s}")
    batch = [i for i in out if i in sa and i in sb]
    left = [i for i in out if i in sa and i not in sb]
    right = [i for i in out if i in sb and i not in sa]
    summed = [i for i in sa if i in sb and i not in out]
    if set(sa) != set(batch + left + summed) or set(sb) != set(batch + right + summed):
        raise ValueError(f"unsupported contraction {sa},{sb}->{out}")
    perm_a = [sa.index(i) + 1 for i in batch + left + summed]
    perm_b = [sb.index(i) + 1 for i in batch + summed + right]
    order = batch + left + right
    perm_out = [0] + [order.index(i) + 1 for i in out]
    return len(batch), len(left), len(right), len(summed), perm_a, perm_b, perm_out


def stack(jets, axis=0):
    """Stack jets of equal (nvars, degree) along a new tensor axis."""
    d = min(j.degree for j in jets)
    nv = jets[0].nvars
    cs = [j.truncate(d).c for j in jets]
    shape = np.broadcast_shapes(*(c.shape[1:] for c in cs))
    cs = [np.broadcast_to(c, c.shape[:1] + shape) for c in cs]
    return Jet(np.stack(cs, axis=axis + 1), nv, d)


def _compose(a, coeffs):
    """Evaluate sum_k coeffs[k] * (a - a0)^k by Horner's rule."""
    delta = Jet(a.c.copy(), a.nvars, a.degree)
    delta.c[0] = 0.0
    result = Jet.constant(np.broadcast_to(coeffs[-1], a.shape), a.nvars, a.degree)
    for ck in reversed(coeffs[:-1]):
        result = result * delta + ck
    return result


def _positive_base(a, name):
    if np.any(a.c[0] <= 0.0):
        raise JetDomainError(f"{name} requires a positive constant term")


def exp(a):
    if not isinstance(a, Jet):
        return np.exp(a)
    e = np.exp(a.c[0])
    return _compose(a, [e / math.factorial(k) for k in range(a.degree + 1)])


def log(a):
    if not isinstance(a, Jet):
        if np.any(np.asarray(a) <= 0.0):
            raise JetDomainError("log requires a positive argument")
        return np.log(a)
    _positive_base(a, "log")
    a0 = a.c[0]
    coeffs = [np.log(a0)] + [(-1.0) ** (k + 1) / (k * a0 ** k) for k in range(1, a.degree + 1)]
    return _compose(a, coeffs)


def sin(a):
    if not isinstance(a, Jet):
        return np.sin(a)
    s, c = np.sin(a.c[0]), np.cos(a.c[0])
    cycle = [s, c, -s, -c]
    return _compose(a, [cycle[k % 4] / math.factorial(k) for k in range(a.degree + 1)])


def cos(a):
    if not isinstance(a, Jet):
        return np.cos(a)
    s, c = np.sin(a.c[0]), np.cos(a.c[0])
    cycle = [c, -s, -c, s]
    return _compose(a, [cycle[k % 4] / math.factorial(k) for k in range(a.degree + 1)])


def power(a, p):
    """Real power a**p for a jet with positive constant term."""
    if not isinstance(a, Jet):
        return np.power(a, p)
    _positive_base(a, "non-integer power")
    a0 = a.c[0]
    coeffs = []
    binom = 1.0
    for k in range(a.degree + 1):
        coeffs.append(binom * a0 ** (p - k))
        binom *= (p - k) / (k + 1)
    return _compose(a, coeffs)


def sqrt(a):
    if not isinstance(a, Jet):
        if np.any(np.asarray(a) < 0.0):
            raise JetDomainError("sqrt requires a non-negative argument")
        return np.sqrt(a)
    return power(a, 0.5)


def powi(a, n):
    """Integer power by repeated squaring (negative n via the reciprocal)."""
    n = int(n)
    if not isinstance(a, Jet):
        return np.asarray(a, dtype=float) ** n
    if n < 0:
        return powi(a.reciprocal(), -n)
    result = None
    base = a
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    if result is None:
        return Jet.constant(np.ones(a.shape), a.nvars, a.degree)
    return result


# spec-facing helpers (1-based axis) -------------------------------------

def jet_var(i, value, num_vars=4, max_degree=4):
    if not 1 <= i <= num_vars:
        raise ValueError(f"axis {i} out of range 1..{num_vars}")
    return Jet.variable(i - 1, value, num_vars, max_degree)


def jet_partial(a, alpha):
    return a.partial(alpha)


ANALYTIC = {"exp": exp, "log": log, "sin": sin, "cos": cos, "sqrt": sqrt}
