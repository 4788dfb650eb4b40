"""Poisson extension of sphere data, its equatorial normal trace and vertical primitive.

Two independent routes are provided:

* spectral: project sphere data on real spherical harmonics, then replace
  each ``Y_lm`` by its solid harmonic ``r^l Y_lm`` (an exact polynomial);
* quadrature: integrate the ball Poisson kernel against the data, switching
  to a target-adapted graded rule with moment subtraction near the sphere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ._parallel import map_chunks
from .errors import ResolutionError, SymmetryError
from .grids import (
    SphereField,
    SphereGrid,
    build_sphere_grid,
    check_interior,
    graded_panel_count,
    graded_sphere_rules,
)
from .harmonics import azimuthal_table, legendre_table, lm_mask, real_sph_harm, solid_harmonic_sum
from .kernels import grad_poisson_kernel_ball, poisson_kernel_ball, poisson_kernel_ball_derivative
from .poly import Poly

SYMMETRY_TOL = 1e-10


def _parity_mask(L: int, odd: bool) -> np.ndarray:
    l = np.arange(L + 1)[:, None]
    m = np.arange(-L, L + 1)[None, :]
    return (((l + m) % 2) == (1 if odd else 0)) & lm_mask(L)


@dataclass(frozen=True, eq=False)
class SphereExpansion:
    """Real spherical-harmonic coefficients up to degree ``L``.

    ``coeffs[l, L + m]`` multiplies ``Y_lm``.  Tags are enforced on
    construction: coefficients violating a tag by more than ``1e-10`` raise
    :class:`SymmetryError`, smaller ones are set exactly to zero.

    ``Y_lm`` is even in x3 when ``l + m`` is even and odd otherwise; it is
    axisymmetric when ``m = 0``.
    """

    coeffs: np.ndarray
    even: bool = False
    axisymmetric: bool = False
    odd: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[1] != 2 * c.shape[0] - 1:
            raise ValueError(f"coefficient array must have shape (L+1, 2L+1), got {c.shape}")
        L = c.shape[0] - 1
        c[~lm_mask(L)] = 0.0
        kill = np.zeros_like(c, dtype=bool)
        if self.even:
            kill |= _parity_mask(L, odd=True)
        if self.odd:
            kill |= _parity_mask(L, odd=False)
        if self.axisymmetric:
            kill[:, np.arange(2 * L + 1) != L] = True
        if np.any(np.abs(c[kill]) > SYMMETRY_TOL):
            bad = float(np.max(np.abs(c[kill])))
            raise SymmetryError(f"coefficients violate the symmetry tag (max {bad:.3e})")
        c[kill] = 0.0
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # ------------------------------------------------------------------
    @property
    def L(self) -> int:
        return self.coeffs.shape[0] - 1

    @classmethod
    def zeros(cls, L: int, **tags) -> "SphereExpansion":
        return cls(np.zeros((L + 1, 2 * L + 1)), **tags)

    @classmethod
    def from_dict(cls, L: int, items, **tags) -> "SphereExpansion":
        """From ``{(l, m): value}`` or an iterable of ``(l, m, value)``."""
        c = np.zeros((L + 1, 2 * L + 1))
        pairs = items.items() if isinstance(items, dict) else (((a, b), v) for a, b, v in items)
        for (l, m), v in pairs:
            if not (0 <= l <= L and abs(m) <= l):
                raise ValueError(f"invalid index (l, m) = ({l}, {m}) for L = {L}")
            c[l, L + m] += v
        return cls(c, **tags)

    def tags(self) -> dict:
        return {"even": self.even, "axisymmetric": self.axisymmetric, "odd": self.odd}

    def with_coeffs(self, coeffs) -> "SphereExpansion":
        return SphereExpansion(coeffs, **self.tags())

    def retagged(self, **tags) -> "SphereExpansion":
        return SphereExpansion(self.coeffs, **tags)

    def resized(self, L: int) -> "SphereExpansion":
        """Truncate or zero-pad to degree ``L``."""
        out = np.zeros((L + 1, 2 * L + 1))
        n = min(L, self.L)
        out[: n + 1, L - n : L + n + 1] = self.coeffs[: n + 1, self.L - n : self.L + n + 1]
        return self.with_coeffs(out)

    def sup_norm(self) -> float:
        """Max-abs coefficient norm (the step-size norm of the fixed-point loop)."""
        return float(np.max(np.abs(self.coeffs)))

    def parity_parts(self):
        """(even, odd) components in x3."""
        ev = np.where(_parity_mask(self.L, odd=False), self.coeffs, 0.0)
        od = np.where(_parity_mask(self.L, odd=True), self.coeffs, 0.0)
        return SphereExpansion(ev), SphereExpansion(od)

    def nonzonal_norm(self) -> float:
        c = self.coeffs.copy()
        c[:, self.L] = 0.0
        return float(np.max(np.abs(c)))

    def _binary(self, other: "SphereExpansion", sign: float) -> "SphereExpansion":
        L = max(self.L, other.L)
        a, b = self.resized(L).coeffs, other.resized(L).coeffs
        common = {k: self.tags()[k] and other.tags()[k] for k in self.tags()}
        return SphereExpansion(a + sign * b, **common)

    def __add__(self, other):
        return self._binary(other, 1.0)

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __mul__(self, scalar):
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    # ------------------------------------------------------------------
    def evaluate(self, points) -> np.ndarray:
        """Values at directions ``points`` (projected radially onto S)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        Y = real_sph_harm(self.L, pts)
        return np.einsum("lm,lmn->n", self.coeffs, Y)

    def synthesize(self, grid: SphereGrid) -> np.ndarray:
        """Values at the nodes of a product grid (uses its tensor structure)."""
        L = self.L
        Q = legendre_table(L, grid.cos_theta)  # (l, |m|, i)
        A = azimuthal_table(L, grid.azimuths)  # (L+m, j)
        out = np.zeros((grid.n_theta, grid.n_phi))
        for m in range(-L, L + 1):
            ring = np.einsum("l,li->i", self.coeffs[abs(m):, L + m], Q[abs(m):, abs(m)])
            out += ring[:, None] * A[L + m][None, :]
        return out.ravel()

    def __call__(self, points) -> np.ndarray:
        return self.evaluate(points)


# ----------------------------------------------------------------------
# projection


def working_grid(L: int) -> SphereGrid:
    """Product grid exact for the degree-3L integrands met when projecting |grad v|^2."""
    return build_sphere_grid(2 * L + 2, 4 * L + 4)


def project_sphere(values: Union[SphereField, Callable], L: int, grid: Optional[SphereGrid] = None, **tags) -> SphereExpansion:
    """L^2(S) projection on real spherical harmonics of degree <= L.

    ``values`` is a :class:`SphereField` or a callable on unit vectors; a
    callable is sampled on ``grid`` (default :func:`working_grid`).
    """
    if isinstance(values, SphereField):
        grid = values.grid
        f = values.values
    else:
        grid = grid or working_grid(L)
        f = np.asarray(values(grid.nodes), dtype=float)
    if grid.degree_exactness < 2 * L:
        raise ResolutionError(
            f"grid ({grid.n_theta}, {grid.n_phi}) integrates degree {grid.degree_exactness} "
            f"exactly; degree {2 * L} is needed for L = {L}"
        )
    F = f.reshape(grid.n_theta, grid.n_phi) * grid.theta_weights[:, None]
    A = azimuthal_table(L, grid.azimuths) * (2.0 * np.pi / grid.n_phi)  # (L+m, j)
    Q = legendre_table(L, grid.cos_theta)  # (l, |m|, i)
    ring = np.einsum("ij,mj->mi", F, A)  # (L+m, i)
    c = np.zeros((L + 1, 2 * L + 1))
    for m in range(-L, L + 1):
        c[abs(m):, L + m] = np.einsum("li,i->l", Q[abs(m):, abs(m)], ring[L + m])
    return SphereExpansion(c, **tags)


# ----------------------------------------------------------------------
# spectral route


def poisson_extend_spectral(exp: SphereExpansion) -> Poly:
    """Harmonic polynomial whose restriction to S is the expansion."""
    w = solid_harmonic_sum(exp.coeffs)
    lap = w.laplacian().max_abs_coeff()
    scale = max(1.0, exp.sup_norm())
    if lap > 1e-12 * scale:
        raise ResolutionError(f"solid-harmonic sum failed the harmonicity check ({lap:.3e})")
    w.harmonic = True
    return w


def equatorial_normal_trace(w: Poly) -> Poly:
    """d/dx3 w restricted to x3 = 0, as a polynomial in (x1, x2)."""
    return w.derivative(2).restrict_x3_zero()


def vertical_primitive(w: Poly) -> Poly:
    """W(x) = int_0^{x3} w(x1, x2, t) dt (not harmonic in general)."""
    W = w.integrate_x3_from_0()
    W.harmonic = False
    return W


# ----------------------------------------------------------------------
# quadrature route


def _as_callable(phi):
    if isinstance(phi, SphereField):
        return phi.func
    if isinstance(phi, SphereExpansion):
        return phi.evaluate
    return phi


@dataclass
class QuadratureOptions:
    """Tuning for the Poisson-integral route.

    ``near_radius``: targets with |x| >= near_radius use the subtraction form.
    ``n_per_panel`` / ``n_az``: resolution of the target-adapted graded rule.
    """

    near_radius: float = 0.5
    n_per_panel: int = 10
    n_az: int = 32


DEFAULT_QUADRATURE = QuadratureOptions()


def _kernel_values(beta: Sequence[int], x, y):
    order = sum(beta)
    if order == 0:
        return poisson_kernel_ball(x, y)
    if order == 1:
        return grad_poisson_kernel_ball(x, y)[..., int(np.argmax(beta))]
    return poisson_kernel_ball_derivative(x, y, beta)


def poisson_integral(phi, x, beta: Sequence[int] = (0, 0, 0), opts: QuadratureOptions = DEFAULT_QUADRATURE) -> np.ndarray:
    """D^beta of the Poisson extension at interior points ``x`` by quadrature.

    ``phi`` is a :class:`SphereField` (nodal route; a generating function, if
    present, enables the adapted rule) or a callable on unit vectors.

    Far targets sum the kernel on the field grid.  Near targets use

        D^b w(x) = D^b phi(xbar)|_{b=0} + int D^b P_B(x; y) (phi(y) - phi(xbar)) dS_y,

    with ``xbar = x / |x|``, integrated on a graded rule centred at ``xbar``
    when a callable is available and on the field grid otherwise.
    """
    pts = check_interior(x)
    beta = tuple(int(b) for b in beta)
    grid_field = phi if isinstance(phi, SphereField) else None
    func = _as_callable(phi)
    if grid_field is None and func is None:
        raise TypeError("phi must be a SphereField, SphereExpansion or callable")
    return map_chunks(lambda block: _poisson_block(grid_field, func, block, beta, opts), pts)


def _poisson_block(grid_field, func, pts, beta, opts) -> np.ndarray:
    out = np.empty(len(pts))
    radius = np.linalg.norm(pts, axis=1)
    far = radius < opts.near_radius
    if grid_field is None:
        far[:] = False
    if np.any(far):
        g = grid_field.grid
        K = _kernel_values(beta, pts[far][:, None, :], g.nodes[None, :, :])
        out[far] = np.sum(K * (g.weights * grid_field.values)[None, :], axis=1)
    near = np.flatnonzero(~far)
    if func is None:
        # nodal data only: subtract the value at the node nearest to xbar
        g = grid_field.grid
        for n in near:
            nearest = int(np.argmax(g.nodes @ pts[n]))
            f0 = grid_field.values[nearest]
            K = _kernel_values(beta, pts[n][None, :], g.nodes)
            base = f0 if sum(beta) == 0 else 0.0
            out[n] = base + np.sum(K * g.weights * (grid_field.values - f0))
        return out
    if near.size == 0:
        return out
    r = radius[near]
    poles = np.where(r[:, None] > 0, pts[near] / np.where(r > 0, r, 1.0)[:, None], np.array([0.0, 0.0, 1.0]))
    counts = graded_panel_count(1.0 - r)
    for P in np.unique(counts):
        sel = np.flatnonzero(counts == P)
        nodes, weights = graded_sphere_rules(poles[sel], 1.0 - r[sel], opts.n_per_panel, opts.n_az)
        f = np.asarray(func(nodes.reshape(-1, 3)), dtype=float).reshape(weights.shape)
        f0 = np.asarray(func(poles[sel]), dtype=float)
        K = _kernel_values(beta, pts[near[sel]][:, None, :], nodes)
        base = f0 if sum(beta) == 0 else 0.0
        out[near[sel]] = base + np.sum(K * weights * (f - f0[:, None]), axis=1)
    return out


def poisson_extend_quadrature(phi, x, opts: QuadratureOptions = DEFAULT_QUADRATURE) -> np.ndarray:
    """w(x) = int_S P_B(x; y) phi(y) dS_y at interior points (vectorized)."""
    return poisson_integral(phi, x, (0, 0, 0), opts)


def poisson_hessian_quadrature(phi, x, opts: QuadratureOptions = DEFAULT_QUADRATURE) -> np.ndarray:
    """Second derivatives D^2 w at points ``x``; shape (n, 3, 3)."""
    pts = check_interior(x)
    H = np.empty((len(pts), 3, 3))
    for i in range(3):
        for j in range(i, 3):
            beta = [0, 0, 0]
            beta[i] += 1
            beta[j] += 1
            H[:, i, j] = H[:, j, i] = poisson_integral(phi, pts, beta, opts)
    return H
