import numpy as np
import pytest
from numpy.testing import assert_allclose

from backus.disk_poisson import DiskPoly, EquatorData, solve_disk_green, solve_disk_spectral
from backus.errors import DomainError, PreconditionError
from backus.grids import DiskField, build_disk_grid
from backus.poly import X1, X2, X3, Poly, rho_squared
from backus.suite import random_rim


def _disk_points(rng, n, r_max=0.95):
    t = rng.random(n) * 2 * np.pi
    r = r_max * np.sqrt(rng.random(n))
    return np.stack([r * np.cos(t), r * np.sin(t)], axis=1)


def _rim(n=256):
    t = 2 * np.pi * np.arange(n) / n
    return t, np.stack([np.cos(t), np.sin(t), np.zeros(n)], axis=1)


@pytest.fixture(scope="module")
def grid():
    return build_disk_grid(64, 128, 2.0)


def test_spectral_examples():
    Z = solve_disk_spectral(Poly.constant(1.0)).to_poly()
    assert Z.allclose((1 - rho_squared()) / 4, 1e-15)
    assert solve_disk_spectral(Poly.zero(), 0.7).to_poly().allclose(Poly.constant(0.7), 0)
    Z = solve_disk_spectral(X1).to_poly()
    assert Z.allclose(X1 * (1 - rho_squared()) / 8, 1e-15)
    assert (-Z.laplacian()).allclose(X1, 1e-15)


def test_spectral_identities_random(rng):
    t, rim = _rim()
    for _ in range(10):
        rhs = Poly.from_terms({(i, j, 0): rng.standard_normal() for i in range(6) for j in range(6 - i)})
        psi = random_rim(rng, 4)
        Z = solve_disk_spectral(rhs, psi).to_poly()
        assert (Z.laplacian() + rhs).max_abs_coeff() <= 1e-12
        assert np.max(np.abs(Z(rim) - psi(t))) <= 1e-12


def test_rejects_x3_dependence():
    with pytest.raises(PreconditionError):
        solve_disk_spectral(X3)


def test_disk_poly_round_trip(rng):
    p = Poly.from_terms({(i, j, 0): rng.standard_normal() for i in range(5) for j in range(5 - i)})
    assert DiskPoly.from_poly(p).to_poly().allclose(p, 1e-14)


def test_equator_data_from_samples():
    t = 2 * np.pi * np.arange(32) / 32
    psi = EquatorData.from_samples(1 + 2 * np.cos(t) - 0.5 * np.sin(3 * t))
    assert_allclose(psi.a[:2], [1.0, 2.0], atol=1e-15)
    assert_allclose(psi.b[3], -0.5, atol=1e-15)
    assert EquatorData.coerce(2.0).is_constant()
    with pytest.raises(TypeError):
        EquatorData.coerce("x")


def test_green_examples(grid):
    one = DiskField(grid, np.ones(grid.size), lambda p: np.ones(len(p)))
    assert abs(solve_disk_green(one, 0.0, [[0.0, 0.0]])[0] - 0.25) <= 1e-4
    zero = DiskField(grid, np.zeros(grid.size), lambda p: np.zeros(len(p)))
    assert abs(solve_disk_green(zero, EquatorData([0.0, 1.0], [0.0, 0.0]), [[0.5, 0.0]])[0] - 0.5) <= 1e-6


def test_green_matches_spectral(grid, rng):
    f = lambda p: p[:, 0]
    xp = _disk_points(rng, 50)
    Z = solve_disk_spectral(X1).to_poly()
    pts = np.column_stack([xp, np.zeros(50)])
    gap = np.max(np.abs(solve_disk_green(DiskField.from_function(grid, f), 0.0, xp) - Z(pts)))
    assert gap <= 1e-3


def test_green_nodal_only(grid):
    fld = DiskField(grid, np.ones(grid.size))
    assert abs(solve_disk_green(fld, 0.0, [[0.1, 0.2]])[0] - (1 - 0.05) / 4) <= 1e-4


def test_green_domain(grid):
    fld = DiskField(grid, np.ones(grid.size))
    with pytest.raises(DomainError):
        solve_disk_green(fld, 0.0, [[1.0, 0.0]])


def test_maximum_principle(grid):
    Z = solve_disk_spectral(1 + X1 * X1 + X2 * X2 * X2 * X2).to_poly()
    pts = np.column_stack([grid.nodes, np.zeros(grid.size)])
    assert np.min(Z(pts)) >= -1e-12
