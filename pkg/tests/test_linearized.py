import numpy as np
import pytest
from numpy.testing import assert_allclose

from backus.disk_poisson import EquatorData
from backus.errors import DomainError, PreconditionError
from backus.harmonic_ext import SphereExpansion, poisson_extend_spectral, project_sphere
from backus.linearized import (
    KernelOptions,
    KernelPath,
    LinearizedSolution,
    evaluate_kernel_K_path,
    harmonic_residual,
    omega_quotient,
    solve_linearized,
)
from backus.norms import HolderMonitor
from backus.poly import X1, X3, Poly, rho_squared
from backus.suite import random_expansion, random_rim

from conftest import ball_points, unit_vectors

L = 6
ONE = SphereExpansion.from_dict(L, {(0, 0): np.sqrt(4 * np.pi)})
CLOSED = X3 * X3 / 2 + (1 - rho_squared()) / 4
FAST = KernelOptions(sphere=(32, 64), disk=(32, 64))


def yN():
    return project_sphere(lambda p: p[:, 2], L)


def test_spectral_examples():
    assert solve_linearized(ONE).v.allclose(X3, 1e-13)
    sol = solve_linearized(yN())
    assert sol.v.allclose(CLOSED, 1e-13)
    assert_allclose(sol(np.zeros(3)), 0.25, atol=1e-14)
    assert solve_linearized(ONE, 0.3).v.allclose(X3 + 0.3, 1e-13)


def test_spectral_from_callable_needs_L():
    with pytest.raises(PreconditionError):
        solve_linearized(lambda p: p[:, 2])
    assert solve_linearized(lambda p: p[:, 2], L=3).v.allclose(CLOSED, 1e-13)


def test_structural_identities(rng):
    for _ in range(10):
        sol = solve_linearized(random_expansion(rng, 8), random_rim(rng))
        r = sol.residuals
        assert r["laplacian_max_coeff"] <= 1e-12
        assert r["dx3_minus_w_max_coeff"] <= 1e-13
        assert r["equator_max_error"] <= 1e-12
        assert r["plane_trace_minus_Z_max_coeff"] <= 1e-13
        y = unit_vectors(rng, 50)
        assert_allclose(sol.w(y), sol.phi.evaluate(y), atol=1e-12)
        assert_allclose(sol.gradient(y)[:, 2], sol.phi.evaluate(y), atol=1e-12)


def test_kernel_path_examples():
    assert abs(evaluate_kernel_K_path(lambda p: p[:, 2], 0.0, [[0, 0, 0]])[0] - 0.25) <= 2e-3
    assert abs(evaluate_kernel_K_path(lambda p: np.ones(len(p)), 0.0, [[0.2, 0, 0.3]])[0] - 0.3) <= 2e-3
    assert abs(evaluate_kernel_K_path(lambda p: np.zeros(len(p)), 1.0, [[0.5, 0, 0]])[0] - 1.0) <= 1e-6


def test_kernel_boundary_values():
    kp = KernelPath(lambda p: p[:, 2], 0.0, FAST)
    y = np.array([[0.0, 0.6, 0.8], [0.0, 0.0, -1.0]])
    assert_allclose(kp.boundary_values(y), CLOSED(y), atol=2e-3)
    with pytest.raises(DomainError):
        kp.boundary_values([[1.0, 0.0, 0.0]])
    with pytest.raises(DomainError):
        kp([[0.0, 0.0, 1.0]])


def test_kernel_callable_psi():
    kp = KernelPath(lambda p: np.zeros(len(p)), lambda t: np.cos(t), FAST)
    assert_allclose(kp([[0.5, 0.0, 0.2]]), 0.5, atol=1e-6)


def test_harmonic_residual_examples():
    probe = ball_points(np.random.default_rng(0), 50, 0.9)
    assert harmonic_residual(solve_linearized(ONE), probe) == 0.0
    assert harmonic_residual(solve_linearized(yN()), probe) <= 1e-12
    with pytest.raises(PreconditionError):
        harmonic_residual(solve_linearized(lambda p: p[:, 2], path="kernel", options=FAST), probe)


def test_omega_examples(rng):
    assert omega_quotient(solve_linearized(ONE)).omega.allclose(Poly.constant(1.0), 1e-13)
    y1 = project_sphere(lambda p: p[:, 0], L)
    om = omega_quotient(solve_linearized(y1))
    assert om.omega.allclose(X1, 1e-13)
    sol = LinearizedSolution("spectral", EquatorData.constant(0.0), v=X3 * X3 / 2)
    om = omega_quotient(sol)
    assert om.omega.allclose(X3 / 2, 0)
    assert_allclose(om([[0.3, 0.1, 0.0]]), 0.0)
    with pytest.raises(PreconditionError):
        omega_quotient(solve_linearized(yN()))


def test_omega_continuous_across_plane(rng):
    for _ in range(5):
        phi = random_expansion(rng, 6, even=True)
        om = omega_quotient(solve_linearized(phi))
        t = rng.random(40) * 2 * np.pi
        r = 0.95 * np.sqrt(rng.random(40))
        xp = np.stack([r * np.cos(t), r * np.sin(t)], axis=1)
        assert om.plane_gap(xp, 1e-9) <= 1e-8


def test_odd_branch_v_is_odd(rng):
    for _ in range(5):
        v = solve_linearized(random_expansion(rng, 8, even=True)).v
        assert (v + v.reflect_x3()).max_abs_coeff() == 0.0


def test_symmetry_inheritance(rng):
    phi = random_expansion(rng, 8, axisymmetric=True)
    v = solve_linearized(phi, 0.4).v
    x = ball_points(rng, 100)
    for a in np.linspace(0.3, 2 * np.pi, 8):
        c, s = np.cos(a), np.sin(a)
        R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
        assert np.max(np.abs(v(x @ R.T) - v(x))) <= 1e-10


def test_a_priori_surrogate_stable(rng):
    mon = HolderMonitor(n_pairs=2000)
    consts = []
    for _ in range(20):
        phi = random_expansion(rng, int(rng.integers(1, 8)))
        psi = random_rim(rng)
        sol = solve_linearized(phi, psi)
        v = sol.v
        lhs = mon.norm(v) + mon.norm(v.derivative(2)) + mon.norm(X3 * v.derivative(0).derivative(0))
        rhs = mon.norm(sol.w) + float(np.max(np.abs(np.concatenate([psi.a, psi.b]))))
        consts.append(lhs / rhs)
    assert np.all(np.isfinite(consts))
    assert max(consts) / min(consts) < 20.0
