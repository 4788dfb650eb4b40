import numpy as np
import pytest
from numpy.testing import assert_allclose

from backus.errors import DomainError, SingularInputError
from backus.grids import build_disk_grid, build_segment_rule, build_sphere_grid, rim_rule
from backus.kernels import (
    fundamental_solution,
    grad_poisson_kernel_ball,
    green_disk,
    kernel_K,
    poisson_kernel_ball,
    poisson_kernel_ball_derivative,
    poisson_kernel_disk,
)
from backus.oracle import kernel_gradient_bound, weighted_kernel_integral

from conftest import ball_points, unit_vectors


def test_poisson_kernel_ball_examples(rng):
    y = unit_vectors(rng, 5)
    assert_allclose(poisson_kernel_ball(np.zeros(3), y), 1 / (4 * np.pi), rtol=1e-15)
    assert_allclose(poisson_kernel_ball(0.9 * y[0], y[0]), 0.19 / 0.001 / (4 * np.pi), rtol=1e-12)
    g = build_sphere_grid(32, 64)
    x = np.array([0.3, 0.0, 0.2])
    P = poisson_kernel_ball(x, g.nodes)
    assert_allclose(P @ g.weights, 1.0, atol=1e-8)
    assert_allclose((P * g.weights) @ g.nodes, x, atol=1e-8)


def test_poisson_kernel_ball_domain():
    with pytest.raises(DomainError):
        poisson_kernel_ball(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    with pytest.raises(DomainError):
        grad_poisson_kernel_ball(np.array([0.6, 0.0, 0.9]), np.array([1.0, 0.0, 0.0]))


def test_grad_matches_finite_difference(rng):
    x = ball_points(rng, 20, 0.9)
    y = unit_vectors(rng, 20)
    g = grad_poisson_kernel_ball(x, y)
    h = 1e-5
    fd = np.stack(
        [(poisson_kernel_ball(x + h * e, y) - poisson_kernel_ball(x - h * e, y)) / (2 * h) for e in np.eye(3)],
        axis=1,
    )
    assert_allclose(g, fd, rtol=1e-6, atol=1e-6 * np.max(np.abs(g)))


def test_grad_at_center(rng):
    y = unit_vectors(rng, 4)
    assert_allclose(grad_poisson_kernel_ball(np.zeros((4, 3)), y), 3 * y / (4 * np.pi), atol=1e-15)


def test_grad_bound_no_blowup():
    sups = [kernel_gradient_bound(10_000, 42, r) for r in (0.9, 0.99, 0.999)]
    assert np.all(np.isfinite(sups))
    assert max(sups) / min(sups) < 10.0


@pytest.mark.parametrize("beta", [(1, 0, 0), (0, 0, 1), (2, 0, 0), (1, 1, 0), (0, 1, 2)])
def test_higher_derivatives_match_fd(rng, beta):
    x = ball_points(rng, 6, 0.7)
    y = unit_vectors(rng, 6)
    axis = int(np.flatnonzero(beta)[0])
    lower = list(beta)
    lower[axis] -= 1
    h = 1e-5
    e = np.eye(3)[axis]
    fd = (poisson_kernel_ball_derivative(x + h * e, y, lower) - poisson_kernel_ball_derivative(x - h * e, y, lower)) / (2 * h)
    exact = poisson_kernel_ball_derivative(x, y, beta)
    assert_allclose(exact, fd, rtol=1e-5, atol=1e-6 * np.max(np.abs(exact)))


def test_fundamental_solution_examples():
    assert fundamental_solution(np.array([1.0, 0.0]), 2) == 0.0
    assert_allclose(fundamental_solution(np.array([np.exp(-1), 0.0]), 2), 1 / (2 * np.pi), rtol=1e-15)
    assert_allclose(fundamental_solution(np.array([0.0, 1.0, 0.0]), 3), 1 / (4 * np.pi), rtol=1e-15)
    with pytest.raises(SingularInputError):
        fundamental_solution(np.zeros(2), 2)


def test_green_disk_examples(rng):
    yp = np.array([0.3, -0.4])
    assert_allclose(green_disk(np.zeros(2), yp), np.log(1 / 0.5) / (2 * np.pi), rtol=1e-14)
    t = rng.random(10) * 2 * np.pi
    rim = np.stack([np.cos(t), np.sin(t)], axis=1)
    assert np.max(np.abs(green_disk(np.array([0.2, 0.5]), rim))) <= 1e-14
    a = rng.random((1000, 2)) * 1.4 - 0.7
    b = rng.random((1000, 2)) * 1.4 - 0.7
    assert np.max(np.abs(green_disk(a, b) - green_disk(b, a))) <= 1e-13
    assert np.all(green_disk(a, b) >= 0)
    with pytest.raises(SingularInputError):
        green_disk(yp, yp)


def test_poisson_kernel_disk_examples():
    ang, w = rim_rule(256)
    rim = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    assert_allclose(poisson_kernel_disk(np.zeros(2), rim[:1]), 1 / (2 * np.pi), rtol=1e-15)
    P = poisson_kernel_disk(np.array([0.5, 0.0]), rim)
    assert np.all(P > 0)
    assert_allclose(P @ w, 1.0, atol=1e-10)
    assert_allclose((poisson_kernel_disk(np.array([0.3, 0.4]), rim) * rim[:, 0]) @ w, 0.3, atol=1e-8)
    with pytest.raises(DomainError):
        poisson_kernel_disk(np.array([1.0, 0.0]), rim[:1])


@pytest.fixture(scope="module")
def K_rules():
    x = np.array([0.2, 0.0, 0.3])
    return x, build_sphere_grid(64, 128), build_segment_rule(x, 16), build_disk_grid(64, 128, 2.0)


def test_kernel_K_constant(K_rules):
    x, sg, seg, dg = K_rules
    K = kernel_K(x, sg.nodes, seg, dg)
    assert abs(K @ sg.weights - 0.3) <= 2e-3


def test_kernel_K_yN(K_rules):
    x, sg, seg, dg = K_rules
    K = kernel_K(x, sg.nodes, seg, dg)
    exact = x[2] ** 2 / 2 + (1 - x[0] ** 2 - x[1] ** 2) / 4
    assert abs((K * sg.nodes[:, 2]) @ sg.weights - exact) <= 2e-3


def test_normalization_improves_under_refinement():
    x = np.array([0.1, 0.5, 0.7])
    errs = []
    for n in (8, 16, 32):
        g = build_sphere_grid(n, 2 * n)
        errs.append(abs(poisson_kernel_ball(x, g.nodes) @ g.weights - 1.0))
    assert errs[0] > errs[1] > errs[2]


def test_weighted_kernel_integral_bounded():
    vals = weighted_kernel_integral((0.9, 0.99, 0.999))
    assert np.all(np.isfinite(vals))
    assert max(vals) < 2.0
