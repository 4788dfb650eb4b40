import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from backus.harmonics import solid_harmonic
from backus.oracle import poly_calculus
from backus.poly import X1, X2, X3, Poly, rho_squared

from conftest import ball_points

coeff = st.floats(-2, 2, allow_nan=False)
terms = st.dictionaries(
    st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4)), coeff, min_size=1, max_size=8
)


def _brute(p: Poly, x):
    return sum(c * x[:, 0] ** i * x[:, 1] ** j * x[:, 2] ** k for (i, j, k), c in p.terms.items())


def test_poly_calculus_examples():
    assert poly_calculus(X1 * X3, "laplacian").max_abs_coeff() == 0.0
    assert poly_calculus(X1 * X3, "integrate_xN_from_0").allclose(X1 * X3 * X3 / 2, atol=0)
    v = X3 * X3 / 2 + (1 - rho_squared()) / 4
    assert poly_calculus(v, "laplacian").max_abs_coeff() <= 1e-15
    assert poly_calculus(X1, "multiply", X2).allclose(Poly.monomial(1, 1, 0), atol=0)
    assert poly_calculus(X3, "derivative", 2).allclose(Poly.constant(1.0), atol=0)


@settings(max_examples=40, deadline=None)
@given(terms)
def test_evaluate_matches_brute_force(t):
    p = Poly.from_terms(t)
    x = ball_points(np.random.default_rng(0), 30, 1.0)
    assert_allclose(p(x), _brute(p, x), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(terms)
def test_integrate_then_differentiate(t):
    p = Poly.from_terms(t)
    W = p.integrate_x3_from_0()
    assert W.derivative(2).allclose(p, atol=1e-15)
    assert W.restrict_x3_zero().max_abs_coeff() == 0.0


@settings(max_examples=40, deadline=None)
@given(terms, terms)
def test_product_rule(a, b):
    p, q = Poly.from_terms(a), Poly.from_terms(b)
    lhs = (p * q).derivative(0)
    rhs = p.derivative(0) * q + p * q.derivative(0)
    assert lhs.allclose(rhs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(terms)
def test_parity_parts(t):
    p = Poly.from_terms(t)
    even, odd = p.x3_parity_parts()
    assert (even + odd).allclose(p, atol=0)
    assert even.reflect_x3().allclose(even, atol=0)
    assert odd.reflect_x3().allclose(-odd, atol=0)


def test_solid_harmonics_are_harmonic():
    for l in range(9):
        for m in range(-l, l + 1):
            Y = solid_harmonic(l, m)
            assert Y.laplacian().max_abs_coeff() <= 1e-12
            assert Y.degree == l


def test_degree_tracks_nonzero_terms():
    p = Poly.from_terms({(2, 0, 1): 1.0, (0, 0, 0): 2.0})
    assert p.degree == 3
    assert (p - Poly.monomial(2, 0, 1)).degree == 0
