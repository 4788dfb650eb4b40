"""Independent verification tools: exact polynomial calculus, manufactured
Backus solutions and numeric checkers for the kernel and regularity estimates.

The checkers report measured suprema.  They fail only on divergence under
refinement, never on the size of a constant, since the constants of the
underlying estimates are not explicit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special

from .errors import DomainError, PreconditionError, SymmetryError
from .grids import build_sphere_grid, graded_sphere_rule
from .harmonic_ext import QuadratureOptions, poisson_integral
from .kernels import grad_poisson_kernel_ball
from .nonlinear import BoundaryData
from .norms import ball_samples, pair_quotient
from .poly import X3, Poly

__all__ = [
    "poly_calculus",
    "ManufacturedCase",
    "make_manufactured",
    "DecayReport",
    "check_derivative_decay",
    "integral_lemma_value",
    "integral_lemma_closed_form",
    "check_integral_lemma",
    "HolderCheck",
    "check_gradient_to_holder",
    "kernel_gradient_bound",
    "weighted_kernel_integral",
]


def poly_calculus(p: Poly, op: str, arg=None):
    """Dispatch one exact operation on a polynomial.

    ``op`` is ``derivative`` (``arg`` = axis), ``laplacian``,
    ``integrate_xN_from_0``, ``evaluate`` (``arg`` = points) or ``multiply``
    (``arg`` = polynomial or scalar).
    """
    if op == "derivative":
        return p.derivative(int(arg))
    if op == "laplacian":
        return p.laplacian()
    if op == "integrate_xN_from_0":
        return p.integrate_x3_from_0()
    if op == "evaluate":
        return p.evaluate(arg)
    if op == "multiply":
        return p * arg
    raise ValueError(f"unknown operation {op!r}")


# ----------------------------------------------------------------------
# manufactured solutions


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    """A harmonic ``u_exact = x3 + eps q`` with the data it generates."""

    name: str
    u_exact: Poly
    g: BoundaryData
    mode: str
    h: float
    tolerances: Dict[str, float] = field(default_factory=dict)


def _is_zonal(q: Poly, tol: float = 1e-12) -> bool:
    pts = ball_samples()
    c, s = np.cos(1.0), np.sin(1.0)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return bool(np.max(np.abs(q(pts @ R.T) - q(pts))) <= tol * max(1.0, q.max_abs_coeff()))


def make_manufactured(q: Poly, eps: float, mode: str, name: str = "", tol: float = 1e-12) -> ManufacturedCase:
    """Backus data g = |grad(x3 + eps q)| on S.

    Mode ``odd`` needs q odd in x3; mode ``axisymmetric`` needs q invariant
    under rotations about the x3-axis (hence constant on the equator).
    """
    if q.laplacian().max_abs_coeff() > tol * max(1.0, q.max_abs_coeff()):
        raise PreconditionError("q must be harmonic")
    u = X3 + q * float(eps)
    t = 2.0 * np.pi * np.arange(64) / 64
    rim = np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1)
    if mode == "odd":
        if q.x3_parity_parts()[0].max_abs_coeff() > tol:
            raise SymmetryError("the odd branch needs q odd in x3")
        h = 0.0
        symmetry = "even"
    elif mode in ("axisymmetric", "axisym"):
        if not _is_zonal(q):
            raise SymmetryError("the axisymmetric branch needs a zonal q")
        mode = "axisymmetric"
        h = float(u(rim)[0])
        symmetry = "axisymmetric"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    g = BoundaryData.from_potential(u, symmetry, h, {"eps": float(eps), "q": [[i, j, k, c] for (i, j, k), c in sorted(q.terms.items())]})
    grid = build_sphere_grid(32, 64)
    if np.any(g.g_squared(grid.nodes) <= 0.0):
        raise DomainError("grad u vanishes on S; eps is too large")
    return ManufacturedCase(name or f"{mode}-eps{eps:g}", u, g, mode, h)


# ----------------------------------------------------------------------
# decay of derivatives of the Poisson extension


@dataclass
class DecayReport:
    """Weighted sups ``max |D^beta w| (1 - |x|^2)^(|beta| - 1 - alpha)`` per probe radius."""

    order: int
    alpha: float
    radii: Tuple[float, ...]
    weighted_sup: Tuple[float, ...]

    @property
    def growth(self) -> Tuple[float, ...]:
        base = self.weighted_sup[0]
        return tuple(v / base if base > 0 else 0.0 for v in self.weighted_sup)

    @property
    def max_growth(self) -> float:
        return max(self.growth)


def _multi_indices(order: int):
    return [(a, b, order - a - b) for a in range(order + 1) for b in range(order + 1 - a)]


def check_derivative_decay(
    phi,
    beta_order: int = 2,
    alpha: float = 0.5,
    radii: Sequence[float] = (0.9, 0.99, 0.999),
    directions: Optional[np.ndarray] = None,
    opts: QuadratureOptions = QuadratureOptions(),
) -> DecayReport:
    """Weighted sups of order-``beta_order`` derivatives of w along radial probes.

    ``phi`` is a callable on unit vectors (or a :class:`SphereField` with a
    generating function).  Directions default to the nodes of a 4 x 8 grid.
    """
    if beta_order not in (2, 3):
        raise ValueError("beta_order must be 2 or 3")
    if directions is None:
        directions = build_sphere_grid(4, 8).nodes
    sups = []
    for r in radii:
        if not 0.0 < r < 1.0:
            raise DomainError("probe radii must lie in (0, 1)")
        x = r * np.asarray(directions, dtype=float)
        vals = np.zeros(len(x))
        for beta in _multi_indices(beta_order):
            vals = np.maximum(vals, np.abs(poisson_integral(phi, x, beta, opts)))
        weight = (1.0 - r * r) ** (beta_order - 1 - alpha)
        sups.append(float(np.max(vals) * weight))
    return DecayReport(beta_order, alpha, tuple(float(r) for r in radii), tuple(sups))


# ----------------------------------------------------------------------
# weighted one-dimensional integral


def integral_lemma_value(xp, xn, kappa: float) -> float:
    """|x3| (1 - |x|^2)^kappa int_0^{|x3|} (1 - |x'|^2 - t^2)^(-1-kappa) dt.

    The inner integral is computed in the scaled variable s = t / a,
    a^2 = 1 - |x'|^2, where the integrand (1 - s^2)^(-1-kappa) is integrated
    by adaptive quadrature with the endpoint behaviour factored out.
    """
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    xp = np.asarray(xp, dtype=float)
    a2 = 1.0 - float(xp @ xp)
    xn = abs(float(xn))
    if a2 <= 0.0 or xn * xn >= a2:
        raise DomainError("the point must lie in the open ball")
    if xn == 0.0:
        return 0.0
    a = np.sqrt(a2)
    sigma = xn / a
    # int_0^sigma (1-s)^(-1-k) (1+s)^(-1-k) ds with u = -log(1 - s) so the
    # integrand becomes exp(k u) (2 - e^-u)^(-1-k): smooth on a finite interval
    top = -np.log1p(-sigma)
    inner, _ = sp_integrate.quad(
        lambda u: np.exp(kappa * u) * (2.0 - np.exp(-u)) ** (-1.0 - kappa),
        0.0, top, epsabs=0.0, epsrel=1e-13, limit=200,
    )
    inner *= a ** (-1.0 - 2.0 * kappa)
    return xn * (a2 - xn * xn) ** kappa * inner


def integral_lemma_closed_form(sigma: float, kappa: float) -> float:
    """sigma (1 - sigma^2)^kappa * sigma 2F1(1/2, 1 + kappa; 3/2; sigma^2)."""
    return sigma * (1.0 - sigma * sigma) ** kappa * sigma * special.hyp2f1(0.5, 1.0 + kappa, 1.5, sigma * sigma)


def check_integral_lemma(kappa: float, samples) -> Dict[str, object]:
    """Evaluate the weighted integral at sample points ``(x1, x2, x3)``.

    Returns the per-sample values, their sup and the limit 1/(2 kappa).
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    vals = [integral_lemma_value(p[:2], p[2], kappa) for p in pts]
    return {"kappa": float(kappa), "values": vals, "sup": float(max(vals)), "limit": 1.0 / (2.0 * kappa)}


# ----------------------------------------------------------------------
# gradient bound to Hoelder bound


@dataclass
class HolderCheck:
    """Pair-sampled [v]_alpha against the gradient-bound constant M."""

    alpha: float
    seminorm: float
    M: float

    @property
    def constant(self) -> float:
        return self.seminorm / self.M if self.M > 0 else 0.0


def check_gradient_to_holder(v: Callable, M: float, alpha: float = 0.5, n_pairs: int = 10_000, seed: int = 42, points=None) -> HolderCheck:
    """Estimate [v]_alpha for v with |grad v| <= M (1 - |x|^2)^(alpha - 1).

    Pairs are drawn from a dense fixed point set in the closed ball (shells
    clustered toward S, where the gradient bound degenerates).
    """
    if points is None:
        g = build_sphere_grid(12, 24)
        radii = (0.0, 0.25, 0.5, 0.75, 0.9, 0.97, 0.99, 0.999, 1.0)
        points = np.vstack([r * g.nodes for r in radii])
    points = np.asarray(points, dtype=float)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, len(points), n_pairs)
    j = rng.integers(0, len(points), n_pairs)
    vals = np.asarray(v(points), dtype=float)
    return HolderCheck(alpha, pair_quotient(points, vals, alpha, i, j), float(M))


# ----------------------------------------------------------------------
# kernel estimates


def kernel_gradient_bound(n_pairs: int = 10_000, seed: int = 42, r_max: float = 0.999) -> float:
    """Empirical sup of |grad_x P_B(x; y)| |x - y|^3 over random interior x and y on S."""
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((n_pairs, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    x = d * (r_max * rng.random(n_pairs) ** (1.0 / 3.0))[:, None]
    y = rng.standard_normal((n_pairs, 3))
    y /= np.linalg.norm(y, axis=1)[:, None]
    g = np.linalg.norm(grad_poisson_kernel_ball(x, y), axis=1)
    return float(np.max(g * np.linalg.norm(x - y, axis=1) ** 3))


def weighted_kernel_integral(radii: Sequence[float] = (0.9, 0.99, 0.999), direction=(0.0, 0.0, 1.0)) -> Tuple[float, ...]:
    """(1 - |x|) int_S |grad_x P_B(x; y)| dS_y along a radius (adapted rule)."""
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    out = []
    for r in radii:
        nodes, weights = graded_sphere_rule(e, 1.0 - r, 12, 48)
        g = np.linalg.norm(grad_poisson_kernel_ball(r * e, nodes), axis=1)
        out.append(float((1.0 - r) * np.sum(g * weights)))
    return tuple(out)
