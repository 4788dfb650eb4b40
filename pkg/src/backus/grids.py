"""Quadrature rules on the unit sphere, the equatorial disk and vertical segments.

Conventions: ``x3`` is the vertical coordinate (the axis of symmetry of the
problem).  Sphere nodes are ordered polar-ring-major, ``index = i * n_phi + j``.
All reductions go through :func:`integrate`, which pairs mirror rings before a
pairwise sum so that reflected integrands give bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from .errors import DomainError, ResolutionError

TWO_PI = 2.0 * np.pi


@lru_cache(maxsize=64)
def _gauss_legendre(n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    # exact mirror symmetry of nodes and weights
    t = 0.5 * (t - t[::-1])
    w = 0.5 * (w + w[::-1])
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    t, w = _gauss_legendre(int(n))
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * w


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Gauss-Legendre (in cos theta) x uniform (in azimuth) product rule on S."""

    n_theta: int
    n_phi: int
    cos_theta: np.ndarray = field(repr=False)
    theta_weights: np.ndarray = field(repr=False)
    azimuths: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.n_theta * self.n_phi

    @property
    def degree_exactness(self) -> int:
        """Largest total polynomial degree integrated exactly."""
        return min(2 * self.n_theta - 1, self.n_phi - 1)

    @property
    def theta(self) -> np.ndarray:
        return np.arccos(self.cos_theta)

    def mirror_index(self) -> np.ndarray:
        """Index of the node reflected through the plane x3 = 0."""
        i = np.arange(self.n_theta)[::-1]
        return (i[:, None] * self.n_phi + np.arange(self.n_phi)[None, :]).ravel()


def build_sphere_grid(n_theta: int, n_phi: int) -> SphereGrid:
    if int(n_theta) != n_theta or int(n_phi) != n_phi:
        raise ValueError("grid counts must be integers")
    if n_theta < 2 or n_phi < 4:
        raise ValueError(f"need n_theta >= 2 and n_phi >= 4, got ({n_theta}, {n_phi})")
    t, wt = _gauss_legendre(int(n_theta))
    # descending cos theta: ring 0 is nearest the north pole
    t = t[::-1].copy()
    wt = wt[::-1].copy()
    az = TWO_PI * (np.arange(n_phi) + 0.5) / n_phi
    s = np.sqrt((1.0 - t) * (1.0 + t))
    nodes = np.empty((n_theta, n_phi, 3))
    nodes[..., 0] = s[:, None] * np.cos(az)[None, :]
    nodes[..., 1] = s[:, None] * np.sin(az)[None, :]
    nodes[..., 2] = t[:, None]
    weights = np.repeat((wt * (TWO_PI / n_phi))[:, None], n_phi, axis=1)
    return SphereGrid(
        int(n_theta), int(n_phi), _frozen(t), _frozen(wt), _frozen(az),
        _frozen(nodes.reshape(-1, 3)), _frozen(weights.ravel()),
    )


@dataclass(frozen=True, eq=False)
class DiskGrid:
    """Polar product rule on the unit disk, radially graded towards the rim."""

    n_r: int
    n_phi: int
    grading: float
    radii: np.ndarray = field(repr=False)
    azimuths: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.n_r * self.n_phi


def build_disk_grid(n_r: int, n_phi: int, grading: float = 2.0) -> DiskGrid:
    """Gauss-Legendre in s on (0, 1), mapped by r = 1 - (1 - s)**grading."""
    if n_r < 2 or n_phi < 4:
        raise ValueError(f"need n_r >= 2 and n_phi >= 4, got ({n_r}, {n_phi})")
    if grading < 1.0:
        raise ValueError(f"grading must be >= 1, got {grading}")
    s, ws = gauss_legendre(n_r, 0.0, 1.0)
    r = 1.0 - (1.0 - s) ** grading
    dr = grading * (1.0 - s) ** (grading - 1.0)
    az = TWO_PI * (np.arange(n_phi) + 0.5) / n_phi
    nodes = np.empty((n_r, n_phi, 2))
    nodes[..., 0] = r[:, None] * np.cos(az)[None, :]
    nodes[..., 1] = r[:, None] * np.sin(az)[None, :]
    weights = np.repeat((ws * dr * r * (TWO_PI / n_phi))[:, None], n_phi, axis=1)
    return DiskGrid(int(n_r), int(n_phi), float(grading), _frozen(r), _frozen(az),
                    _frozen(nodes.reshape(-1, 2)), _frozen(weights.ravel()))


@dataclass(frozen=True, eq=False)
class SegmentRule:
    """Gauss rule on the vertical segment from (x', 0) to (x', x3)."""

    base: np.ndarray
    endpoint: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray


def build_segment_rule(x, n: int = 16) -> SegmentRule:
    """Rule for integrals ``int_0^{x3} f(x', t) dt`` (signed: negative x3 flips)."""
    x = np.asarray(x, dtype=float)
    t, w = gauss_legendre(n, 0.0, x[2])
    nodes = np.empty((n, 3))
    nodes[:, :2] = x[:2]
    nodes[:, 2] = t
    base = np.array([x[0], x[1], 0.0])
    return SegmentRule(_frozen(base), _frozen(x), _frozen(nodes), _frozen(w))


# ----------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class SphereField:
    """Nodal samples of a function on a sphere grid.

    ``func`` optionally keeps the generating callable (points of shape (n, 3)
    to values) so that target-adapted rules can resample it.
    """

    grid: SphereGrid
    values: np.ndarray
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} values, got shape {v.shape}")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_function(cls, grid: SphereGrid, func) -> "SphereField":
        return cls(grid, np.asarray(func(grid.nodes), dtype=float), func)

    def evaluate(self, points) -> np.ndarray:
        if self.func is None:
            raise ResolutionError("field has no generating function; only nodal values are available")
        return np.asarray(self.func(np.asarray(points, dtype=float)), dtype=float)


@dataclass(frozen=True, eq=False)
class DiskField:
    """Nodal samples of a function on a disk grid (optionally with its callable)."""

    grid: DiskGrid
    values: np.ndarray
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} values, got shape {v.shape}")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_function(cls, grid: DiskGrid, func) -> "DiskField":
        return cls(grid, np.asarray(func(grid.nodes), dtype=float), func)


def integrate(fld: Union[SphereField, DiskField]) -> float:
    """Weighted sum with a fixed reduction order.

    For sphere fields the ring ``i`` and its mirror ring are added first, so
    an integrand and its reflection through x3 = 0 give the same bits.
    """
    values = np.asarray(fld.values, dtype=float)
    weights = fld.grid.weights
    if values.shape != weights.shape:
        raise ValueError(f"{values.shape[0]} values for {weights.shape[0]} nodes")
    if isinstance(fld, SphereField):
        g = fld.grid
        v = values.reshape(g.n_theta, g.n_phi)
        w = g.theta_weights * (TWO_PI / g.n_phi)
        half = g.n_theta // 2
        paired = (v[:half] + v[::-1][:half]) * w[:half, None]
        parts = [paired.ravel()]
        if g.n_theta % 2:
            parts.append(v[half] * w[half])
        return float(np.sum(np.concatenate(parts)))
    return float(np.sum(values * weights))


# ----------------------------------------------------------------------
# target-adapted rules for nearly singular kernels


def orthonormal_frame(pole) -> np.ndarray:
    """Rows (e1, e2, pole) of a right-handed orthonormal frame."""
    p = np.asarray(pole, dtype=float)
    p = p / np.linalg.norm(p)
    a = np.zeros(3)
    a[int(np.argmin(np.abs(p)))] = 1.0
    e1 = a - np.dot(a, p) * p
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    return np.stack([e1, e2, p])


def graded_polar_nodes(distance: float, n_per_panel: int = 12):
    """Polar-angle nodes on [0, pi] in geometric panels starting at ``distance``.

    Panels are ``[0, d], [d, 2d], [2d, 4d], ...``; each carries a Gauss rule.
    Resolves kernels peaked on the scale ``d`` around the pole.
    """
    d = float(min(max(distance, 1e-14), np.pi))
    edges = [0.0, d]
    while edges[-1] < np.pi:
        edges.append(min(2.0 * edges[-1], np.pi))
    ts, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        t, w = gauss_legendre(n_per_panel, a, b)
        ts.append(t)
        ws.append(w)
    return np.concatenate(ts), np.concatenate(ws)


def graded_sphere_rule(pole, distance: float, n_per_panel: int = 12, n_az: int = 48):
    """Nodes and weights on S clustered around ``pole`` on the scale ``distance``.

    Returns ``(nodes (n, 3), weights (n,))``.  Intended for integrands like
    the ball Poisson kernel at ``(1 - distance) * pole``, which depend on the
    polar angle about ``pole`` only through the kernel.
    """
    frame = orthonormal_frame(pole)
    th, wth = graded_polar_nodes(distance, n_per_panel)
    az = TWO_PI * (np.arange(n_az) + 0.5) / n_az
    st, ct = np.sin(th), np.cos(th)
    local = np.empty((len(th), n_az, 3))
    local[..., 0] = st[:, None] * np.cos(az)[None, :]
    local[..., 1] = st[:, None] * np.sin(az)[None, :]
    local[..., 2] = ct[:, None]
    nodes = local.reshape(-1, 3) @ frame
    weights = np.repeat((wth * st * (TWO_PI / n_az))[:, None], n_az, axis=1).ravel()
    return nodes, weights


def graded_panel_count(distance) -> np.ndarray:
    """Number of panels :func:`graded_polar_nodes` uses for each distance."""
    d = np.clip(np.asarray(distance, dtype=float), 1e-14, np.pi)
    return 1 + np.maximum(0, np.ceil(np.log2(np.pi / d) - 1e-12)).astype(int)


def orthonormal_frames(poles) -> np.ndarray:
    """Batched :func:`orthonormal_frame`; shape (n, 3, 3)."""
    p = np.asarray(poles, dtype=float)
    p = p / np.linalg.norm(p, axis=1)[:, None]
    a = np.zeros_like(p)
    a[np.arange(len(p)), np.argmin(np.abs(p), axis=1)] = 1.0
    e1 = a - np.sum(a * p, axis=1)[:, None] * p
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.stack(
        [
            p[:, 1] * e1[:, 2] - p[:, 2] * e1[:, 1],
            p[:, 2] * e1[:, 0] - p[:, 0] * e1[:, 2],
            p[:, 0] * e1[:, 1] - p[:, 1] * e1[:, 0],
        ],
        axis=1,
    )
    return np.stack([e1, e2, p], axis=1)


def graded_sphere_rules(poles, distances, n_per_panel: int = 12, n_az: int = 48):
    """Batched :func:`graded_sphere_rule` for targets sharing one panel count.

    Returns ``(nodes (n, m, 3), weights (n, m))``.
    """
    d = np.clip(np.asarray(distances, dtype=float), 1e-14, np.pi)
    counts = graded_panel_count(d)
    if np.any(counts != counts[0]):
        raise ValueError("all distances must produce the same panel count")
    P = int(counts[0])
    k = np.arange(P + 1)
    edges = np.where(k == 0, 0.0, d[:, None] * 2.0 ** np.maximum(k - 1, 0)[None, :])
    edges = np.minimum(edges, np.pi)
    t, w = _gauss_legendre(int(n_per_panel))
    lo, hi = edges[:, :-1], edges[:, 1:]
    half = 0.5 * (hi - lo)
    th = (lo[:, :, None] + half[:, :, None] * (t + 1.0)[None, None, :]).reshape(len(d), -1)
    wth = (half[:, :, None] * w[None, None, :]).reshape(len(d), -1)
    az = TWO_PI * (np.arange(n_az) + 0.5) / n_az
    st, ct = np.sin(th), np.cos(th)
    local = np.empty(th.shape + (n_az, 3))
    local[..., 0] = st[:, :, None] * np.cos(az)
    local[..., 1] = st[:, :, None] * np.sin(az)
    local[..., 2] = ct[:, :, None]
    frames = orthonormal_frames(poles)
    nodes = np.einsum("nka,nab->nkb", local.reshape(len(d), -1, 3), frames)
    weights = np.repeat((wth * st * (TWO_PI / n_az))[:, :, None], n_az, axis=2).reshape(len(d), -1)
    return nodes, weights


def rim_rule(n: int):
    """Trapezoid rule on the unit circle: angles and arc weights."""
    ang = TWO_PI * np.arange(n) / n
    return ang, np.full(n, TWO_PI / n)


def interior_lattice(n: int, radius: float = 0.9):
    """Cartesian lattice on [-1, 1]^3 with ``n`` points per axis, clipped to |x| <= radius.

    Returns ``(points (m, 3), spacing)``.
    """
    ax = np.linspace(-1.0, 1.0, n)
    h = float(ax[1] - ax[0])
    X = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
    keep = np.linalg.norm(X, axis=1) <= radius
    return X[keep], h


def check_interior(points, what: str = "point") -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(np.linalg.norm(pts, axis=-1) >= 1.0):
        raise DomainError(f"{what} must lie strictly inside the unit ball")
    return pts
