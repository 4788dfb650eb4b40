import numpy as np
import pytest
from numpy.testing import assert_allclose

from backus.errors import DomainError, PreconditionError, SymmetryError
from backus.grids import build_sphere_grid
from backus.harmonic_ext import SphereExpansion
from backus.oracle import (
    check_derivative_decay,
    check_gradient_to_holder,
    check_integral_lemma,
    integral_lemma_closed_form,
    integral_lemma_value,
    make_manufactured,
)
from backus.poly import X1, X2, X3, Poly, rho_squared

from conftest import unit_vectors


def test_manufactured_examples(rng):
    c = make_manufactured(X1 * X3, 0.05, "odd")
    y = unit_vectors(rng, 50)
    assert_allclose(c.g.func(y) ** 2, 1 + 0.1 * y[:, 0] + 0.0025 * (y[:, 0] ** 2 + y[:, 2] ** 2), atol=1e-14)
    assert c.u_exact.laplacian().max_abs_coeff() == 0.0
    a = make_manufactured(X3 * X3 - rho_squared() / 2, 0.05, "axisymmetric")
    assert_allclose(a.h, -0.025, atol=1e-17)
    s = make_manufactured(X3, 0.3, "odd")
    assert_allclose(s.g.func(y), 1.3, atol=1e-15)
    assert s.u_exact.allclose(X3 * 1.3, 1e-15)


def test_manufactured_errors():
    with pytest.raises(PreconditionError):
        make_manufactured(X1 * X1, 0.05, "odd")
    with pytest.raises(SymmetryError):
        make_manufactured(X1 * X2, 0.05, "odd")
    with pytest.raises(SymmetryError):
        make_manufactured(X1 * X3, 0.05, "axisymmetric")
    with pytest.raises(DomainError):
        make_manufactured(X3, -1.0, "odd")


def test_manufactured_g_positive():
    c = make_manufactured(X1 * X3 + X2 * X3, 0.2, "odd")
    assert np.all(c.g.func(build_sphere_grid(32, 64).nodes) > 0)


def test_decay_examples():
    smooth = check_derivative_decay(lambda p: p[:, 0] * p[:, 2])
    assert max(smooth.weighted_sup) <= 2 * smooth.weighted_sup[0]
    assert check_derivative_decay(lambda p: np.ones(len(p))).weighted_sup[-1] <= 1e-8
    sups = []
    for L in (2, 4, 8):
        mode = SphereExpansion.from_dict(L, {(L, 0): 1.0})
        sups.append(check_derivative_decay(mode.evaluate, radii=(0.9,)).weighted_sup[0])
    assert np.all(np.isfinite(sups)) and sups[0] < sups[1] < sups[2]
    with pytest.raises(DomainError):
        check_derivative_decay(lambda p: p[:, 0], radii=(1.0,))


@pytest.mark.parametrize("kappa,limit", [(1.0, 0.5), (0.5, 1.0), (2.0, 0.25)])
def test_integral_lemma_limit(kappa, limit):
    res = check_integral_lemma(kappa, [[0.3, 0.4, 0.999 * np.sqrt(0.75)]])
    assert abs(res["sup"] / limit - 1) <= 0.01
    assert res["limit"] == limit


def test_integral_lemma_zero_and_closed_form():
    assert integral_lemma_value([0.2, 0.1], 0.0, 1.0) == 0.0
    for sigma in (0.3, 0.9, 0.999):
        for kappa in (0.5, 1.0, 2.0):
            assert_allclose(integral_lemma_value([0.0, 0.0], sigma, kappa), integral_lemma_closed_form(sigma, kappa), rtol=1e-10)
    with pytest.raises(DomainError):
        integral_lemma_value([0.6, 0.0], 0.8, 1.0)


def test_gradient_to_holder_examples():
    alpha = 0.5
    x3 = check_gradient_to_holder(lambda p: p[:, 2], 1.0, alpha)
    assert 0 < x3.seminorm <= 2 ** (1 - alpha)
    b = check_gradient_to_holder(lambda p: np.clip(1 - np.sum(p * p, axis=1), 0, None) ** alpha, 2 * alpha, alpha)
    assert np.isfinite(b.seminorm) and np.isfinite(b.constant)
    assert check_gradient_to_holder(lambda p: np.full(len(p), 3.0), 1.0, alpha).seminorm == 0.0
