import numpy as np
import pytest
from numpy.testing import assert_allclose

from backus.errors import DomainError, ResolutionError, SymmetryError
from backus.grids import SphereField, build_sphere_grid
from backus.harmonic_ext import (
    QuadratureOptions,
    SphereExpansion,
    equatorial_normal_trace,
    poisson_extend_quadrature,
    poisson_extend_spectral,
    project_sphere,
    vertical_primitive,
)
from backus.oracle import check_derivative_decay
from backus.poly import X1, X3, Poly
from backus.suite import random_expansion

from conftest import ball_points, unit_vectors


def test_project_examples():
    e = project_sphere(lambda p: p[:, 2], 6)
    mask = np.ones_like(e.coeffs, dtype=bool)
    mask[1, 6] = False
    assert np.max(np.abs(e.coeffs[mask])) <= 1e-13
    assert abs(e.coeffs[1, 6]) > 0.5
    one = project_sphere(lambda p: np.ones(len(p)), 6)
    assert_allclose(one.coeffs[0, 6], np.sqrt(4 * np.pi), rtol=1e-14)
    assert np.sum(np.abs(one.coeffs) > 1e-13) == 1


def test_round_trip(rng):
    f = lambda p: p[:, 0] * p[:, 2]
    e = project_sphere(f, 4)
    y = unit_vectors(rng, 200)
    assert np.max(np.abs(e.evaluate(y) - f(y))) <= 1e-12


def test_project_resolution_error():
    g = build_sphere_grid(4, 8)
    with pytest.raises(ResolutionError):
        project_sphere(SphereField(g, np.ones(g.size)), 8)


def test_symmetry_tags_enforced():
    with pytest.raises(SymmetryError):
        SphereExpansion.from_dict(2, {(1, 0): 1.0}, even=True)
    with pytest.raises(SymmetryError):
        SphereExpansion.from_dict(2, {(1, 1): 1.0}, axisymmetric=True)
    e = SphereExpansion.from_dict(2, {(1, 0): 1e-12, (2, 0): 1.0}, even=True)
    assert e.coeffs[1, 2] == 0.0


def test_extend_spectral_examples():
    L = 6
    assert poisson_extend_spectral(project_sphere(lambda p: np.ones(len(p)), L)).allclose(Poly.constant(1.0), 1e-13)
    assert poisson_extend_spectral(project_sphere(lambda p: p[:, 2], L)).allclose(X3, 1e-13)
    w = poisson_extend_spectral(project_sphere(lambda p: p[:, 0] * p[:, 2], L))
    assert w.allclose(X1 * X3, 1e-13)
    assert w.harmonic


def test_extend_spectral_reproduces_trace(rng):
    e = random_expansion(rng, 10)
    y = unit_vectors(rng, 100)
    assert_allclose(poisson_extend_spectral(e)(y), e.evaluate(y), atol=1e-12)


def test_quadrature_examples(rng):
    assert_allclose(poisson_extend_quadrature(lambda p: np.ones(len(p)), [[0, 0, 0.99]]), 1.0, atol=1e-10)
    assert_allclose(poisson_extend_quadrature(lambda p: p[:, 2], [[0.1, 0.2, 0.3]]), 0.3, atol=1e-6)
    x = ball_points(rng, 100, 0.999)
    f = lambda p: p[:, 0] * p[:, 2]
    assert np.max(np.abs(poisson_extend_quadrature(f, x) - x[:, 0] * x[:, 2])) <= 1e-6


def test_quadrature_nodal_field():
    g = build_sphere_grid(32, 64)
    fld = SphereField(g, g.nodes[:, 2] ** 2)
    x = np.array([[0.2, 0.1, 0.3]])
    exact = project_sphere(lambda p: p[:, 2] ** 2, 2)
    assert_allclose(poisson_extend_quadrature(fld, x), poisson_extend_spectral(exact)(x), atol=1e-12)


def test_quadrature_domain():
    with pytest.raises(DomainError):
        poisson_extend_quadrature(lambda p: p[:, 2], [[0.0, 0.0, 1.0]])


def test_quadrature_refinement(rng):
    f = lambda p: np.exp(p[:, 0]) * p[:, 2]
    exact = poisson_extend_spectral(project_sphere(f, 24))
    x = ball_points(rng, 20, 0.98)
    errs = [
        np.max(np.abs(poisson_extend_quadrature(f, x, QuadratureOptions(n_per_panel=n, n_az=2 * n + 8)) - exact(x)))
        for n in (4, 8)
    ]
    assert errs[1] < errs[0]


def test_trace_and_primitive_examples():
    assert equatorial_normal_trace(X3).allclose(Poly.constant(1.0), 0)
    assert equatorial_normal_trace(Poly.constant(1.0)).max_abs_coeff() == 0.0
    assert equatorial_normal_trace(X1 * X3).allclose(X1, 0)
    assert vertical_primitive(Poly.constant(1.0)).allclose(X3, 0)
    assert vertical_primitive(X3).allclose(X3 * X3 / 2, 0)
    W = vertical_primitive(X1 * X3)
    assert W.allclose(X1 * X3 * X3 / 2, 0)
    assert W.laplacian().allclose(equatorial_normal_trace(X1 * X3), 0)


def test_primitive_identities_random(rng):
    for _ in range(50):
        w = poisson_extend_spectral(random_expansion(rng, int(rng.integers(0, 11))))
        W = vertical_primitive(w)
        assert W.derivative(2).allclose(w, 1e-14)
        assert (W.laplacian() - equatorial_normal_trace(w)).max_abs_coeff() <= 1e-12


def test_decay_for_holder_data():
    phi = lambda p: np.abs(p[:, 2]) ** 1.5
    dirs = np.array([[1, 0, 0], [0.6, 0, 0.8], [0, 0.8, 0.6]], float)
    coarse = check_derivative_decay(phi, 2, 0.5, directions=dirs)
    fine = check_derivative_decay(phi, 2, 0.5, directions=dirs, opts=QuadratureOptions(n_per_panel=14, n_az=48))
    assert coarse.max_growth < 2.0
    assert_allclose(coarse.weighted_sup, fine.weighted_sup, rtol=1e-2)
