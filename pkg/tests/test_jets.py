import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornergb import jets
from cornergb.expr import evaluate, parse_expression
from cornergb.jets import Jet, JetDomainError, jet_partial, jet_var, monomials, ncoef

from fd_oracle import central_partial, mp_evaluate, random_field

EPS = np.finfo(float).eps


@st.composite
def int_jets(draw, count=3):
    nvars = draw(st.integers(1, 4))
    degree = draw(st.integers(0, 4))
    n = ncoef(nvars, degree)
    out = []
    for _ in range(count):
        vals = draw(st.lists(st.integers(-20, 20), min_size=n, max_size=n))
        out.append(Jet(np.array(vals, dtype=float), nvars, degree))
    return out


# construction and extraction ----------------------------------------------

def test_jet_var_coefficients():
    assert jet_var(1, 0.5).coeffs == {(0, 0, 0, 0): 0.5, (1, 0, 0, 0): 1.0}
    assert jet_var(4, 0.0).coeffs == {(0, 0, 0, 1): 1.0}


@pytest.mark.parametrize("axis", [0, 5, -1])
def test_jet_var_rejects_out_of_range_axis(axis):
    with pytest.raises(ValueError, match="out of range"):
        jet_var(axis, 0.0)


def test_partial_of_square_and_constant():
    x = jet_var(1, 0.0)
    assert jet_partial(x * x, (2, 0, 0, 0)) == 2.0
    f = jets.exp(jet_var(2, 0.3)) + 1.0
    assert jet_partial(f, ()) == pytest.approx(math.exp(0.3) + 1.0, rel=1e-15)


def test_partial_of_exp_xy():
    f = jets.exp(jet_var(1, 0.0) * jet_var(2, 0.0))
    assert jet_partial(f, (1, 1, 0, 0)) == pytest.approx(1.0, abs=1e-15)


def test_partial_rejects_excess_order():
    with pytest.raises(ValueError, match="exceeds"):
        jet_partial(jet_var(1, 0.0, max_degree=2), (2, 1, 0, 0))


def test_polynomial_identity():
    x = jet_var(1, 0.0)
    assert ((1 + x) * (1 - x)).coeffs == {(0, 0, 0, 0): 1.0, (2, 0, 0, 0): -1.0}


def test_geometric_series():
    x = jet_var(1, 0.0, max_degree=2)
    assert (1.0 / (1.0 - x)).coeffs == {(0, 0, 0, 0): 1.0, (1, 0, 0, 0): 1.0,
                                        (2, 0, 0, 0): 1.0}


def test_exp_series():
    e = jets.exp(jet_var(1, 0.0, max_degree=3))
    assert e.coeffs == pytest.approx({(0, 0, 0, 0): 1.0, (1, 0, 0, 0): 1.0,
                                      (2, 0, 0, 0): 0.5, (3, 0, 0, 0): 1.0 / 6.0}, rel=1e-15)


def test_sqrt_of_one_is_constant():
    assert jets.sqrt(Jet.constant(1.0)).coeffs == {(0, 0, 0, 0): 1.0}


def test_division_by_zero_constant_term():
    with pytest.raises(ZeroDivisionError):
        Jet.constant(1.0) / jet_var(1, 0.0)


@pytest.mark.parametrize("fn", [jets.log, jets.sqrt])
def test_domain_violations(fn):
    with pytest.raises(JetDomainError):
        fn(jet_var(1, -0.5))


def test_mismatched_variable_counts():
    with pytest.raises(ValueError):
        jet_var(1, 0.0, num_vars=2) + jet_var(1, 0.0, num_vars=3)


def test_integer_powers():
    x = jet_var(1, 2.0)
    assert (x ** 3).coeffs == pytest.approx(
        {(0, 0, 0, 0): 8.0, (1, 0, 0, 0): 12.0, (2, 0, 0, 0): 6.0, (3, 0, 0, 0): 1.0})
    inv = x ** -2
    for k in range(5):
        # d^k/dx^k x^-2 / k! at 2 is (-1)^k (k+1) 2^-(k+2)
        assert inv.coeffs[(k, 0, 0, 0)] == pytest.approx((-1) ** k * (k + 1) / 2 ** (k + 2))


# ring axioms on integer coefficients (exact in floating point) -------------

@settings(max_examples=200, deadline=None)
@given(int_jets())
def test_ring_axioms_exact(abc):
    a, b, c = abc
    np.testing.assert_array_equal(((a + b) + c).c, (a + (b + c)).c)
    np.testing.assert_array_equal((a * b).c, (b * a).c)
    np.testing.assert_array_equal((a * (b + c)).c, (a * b + a * c).c)
    np.testing.assert_array_equal(((a * b) * c).c, (a * (b * c)).c)


@settings(max_examples=200, deadline=None)
@given(int_jets(count=2))
def test_derivative_rules_exact(ab):
    a, b = ab
    if a.degree == 0:
        return
    for i in range(a.nvars):
        np.testing.assert_array_equal((a + b).d(i).c, (a.d(i) + b.d(i)).c)
        np.testing.assert_array_equal((a * b).d(i).c, (a.d(i) * b + a * b.d(i)).c)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_division_roundtrip(nvars, degree, seed):
    r = np.random.default_rng(seed)
    n = ncoef(nvars, degree)
    a = Jet(r.uniform(-1, 1, n), nvars, degree)
    bc = r.uniform(-0.5, 0.5, n)
    bc[0] = r.choice([-1, 1]) * r.uniform(1.0, 2.0)
    b = Jet(bc, nvars, degree)
    q = a / b
    back = b * q
    # round-off scale: the absolute-value product bounds every summand
    scale = (Jet(np.abs(b.c), nvars, degree) * Jet(np.abs(q.c), nvars, degree)).c
    assert np.all(np.abs(back.c - a.c) <= 4 * EPS * np.maximum(scale, np.abs(a.c)))


def test_dtype_preserved_in_long_double():
    x = jet_var(1, np.longdouble(0.3))
    f = jets.sin(x) * jets.exp(x) / (2.0 + x)
    assert f.c.dtype == np.longdouble
    g = jets.sin(jet_var(1, 0.3)) * jets.exp(jet_var(1, 0.3)) / (2.0 + jet_var(1, 0.3))
    np.testing.assert_allclose(f.c.astype(float), g.c, rtol=1e-14, atol=1e-16)


def test_batched_matches_scalar():
    pts = np.array([0.1, 0.4, -0.3])
    x = Jet.variable(0, pts, 2, 3)
    y = Jet.variable(1, 2 * pts, 2, 3)
    f = jets.cos(x * y) + x ** 2 / (1.0 + y * y)
    for k, p in enumerate(pts):
        xs, ys = Jet.variable(0, p, 2, 3), Jet.variable(1, 2 * p, 2, 3)
        fs = jets.cos(xs * ys) + xs ** 2 / (1.0 + ys * ys)
        np.testing.assert_allclose(f.c[:, k], fs.c, rtol=1e-14, atol=1e-15)


# finite-difference oracle --------------------------------------------------

def _fd_cases(count, seed):
    r = np.random.default_rng(seed)
    return [(random_field(r), r.uniform(-0.3, 0.3, 4)) for _ in range(count)]


def fd_max_error(text, x0, max_order=4):
    """Largest |jet - fd| / max(1, |fd|) over all partials up to ``max_order``."""
    tree = parse_expression(text)
    xs = [Jet.variable(i, x0[i], 4, max_order) for i in range(4)]
    jet = evaluate(tree, xs)
    worst = 0.0
    for alpha in monomials(4, max_order):
        fd = central_partial(lambda x: mp_evaluate(tree, x), x0, alpha)
        err = abs(jet.partial(alpha) - fd) / max(1.0, abs(fd))
        worst = max(worst, err)
    return worst


@pytest.mark.parametrize("case", range(10))
def test_composed_fields_match_finite_differences(case):
    text, x0 = _fd_cases(10, 7)[case]
    assert fd_max_error(text, x0) < 1e-6


@pytest.mark.parametrize("fn", ["exp", "log", "sin", "cos", "sqrt"])
def test_analytic_primitives_match_finite_differences(fn):
    text = f"{fn}(1.3 + 0.4*x1 - 0.2*x2 + 0.3*x3*x4)"
    assert fd_max_error(text, np.array([0.1, -0.2, 0.25, 0.05])) < 1e-6


def test_product_of_random_jets_matches_finite_differences(rng):
    # random degree-4 jets as Taylor data of smooth fields (length scale 2)
    mons = monomials(4, 4)
    fact = np.array([math.prod(math.factorial(e) for e in m) * 2.0 ** sum(m) for m in mons])
    cs = [rng.uniform(-1, 1, ncoef(4, 4)) / fact for _ in range(2)]
    a, b = (Jet(c, 4, 4) for c in cs)

    def value(c, x):
        return sum(ck * math.prod(xi ** e for xi, e in zip(x, m)) for ck, m in zip(c, mons))

    prod = a * b
    for alpha in mons:
        fd = central_partial(lambda x: value(cs[0], x) * value(cs[1], x), [0, 0, 0, 0], alpha)
        assert abs(prod.partial(alpha) - fd) <= 1e-6 * max(1.0, abs(fd))


def test_contract_matches_einsum(rng):
    A = Jet(rng.normal(size=(ncoef(4, 2), 3, 4, 4)), 4, 2)
    B = Jet(rng.normal(size=(ncoef(4, 2), 3, 4)), 4, 2)
    C = jets.contract("nij,nj->ni", A, B)
    direct = jets.stack([sum((A[:, i, j] * B[:, j] for j in range(4)), Jet.constant(
        np.zeros(3), 4, 2)) for i in range(4)], axis=1)
    np.testing.assert_allclose(C.c, direct.c, rtol=1e-13, atol=1e-13)
