"""Discrete surrogates of Hoelder norms on the closed unit ball.

``|f|_{1+alpha}`` is approximated by

    sup |f| + sup |grad f| + max_{pairs} |grad f(a) - grad f(b)| / |a - b|^alpha

over a fixed point set in the closed ball and a seeded sample of point pairs.
Surrogates are reported, never used to prove anything: the constants they
feed are diagnostics of the fixed-point run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .grids import build_sphere_grid
from .poly import Poly

__all__ = ["HolderMonitor", "ball_samples", "pair_quotient"]


def ball_samples(n_theta: int = 8, n_phi: int = 16, radii=(0.35, 0.7, 0.9, 1.0)) -> np.ndarray:
    """Deterministic points in the closed ball: the origin plus scaled sphere-grid shells."""
    g = build_sphere_grid(n_theta, n_phi)
    shells = [r * g.nodes for r in radii]
    return np.vstack([np.zeros((1, 3))] + shells)


def pair_quotient(points: np.ndarray, values: np.ndarray, alpha: float, i: np.ndarray, j: np.ndarray) -> float:
    """max |values[i] - values[j]| / |points[i] - points[j]|^alpha over the given pairs.

    ``values`` may be scalar (n,) or vector valued (n, k); vector differences
    use the Euclidean norm.
    """
    d = np.linalg.norm(points[i] - points[j], axis=1)
    diff = values[i] - values[j]
    if diff.ndim > 1:
        diff = np.linalg.norm(diff, axis=1)
    keep = d > 0.0
    if not np.any(keep):
        return 0.0
    return float(np.max(np.abs(diff[keep]) / d[keep] ** alpha))


@dataclass(frozen=True, eq=False)
class HolderMonitor:
    """Seeded pair sampler for ``|.|_{1+alpha}`` surrogates.

    Parameters
    ----------
    alpha : float
        Hoelder exponent in (0, 1).
    n_pairs : int
        Number of sampled point pairs.
    seed : int
        Seed of the pair sampler; fixed seeds give identical reports.
    fd_step : float
        Central-difference step for callables without exact gradients.
    """

    alpha: float = 0.5
    n_pairs: int = 10_000
    seed: int = 42
    fd_step: float = 1e-6
    points: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        pts = ball_samples() if self.points is None else np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        rng = np.random.default_rng(self.seed)
        n = len(pts)
        i = rng.integers(0, n, self.n_pairs)
        j = rng.integers(0, n, self.n_pairs)
        object.__setattr__(self, "_pairs", (i, j))

    def _values_and_gradients(self, f: Union[Poly, Callable]):
        if isinstance(f, Poly):
            pts = self.points
            vals = f(pts)
            grads = np.stack([g(pts) for g in f.gradient()], axis=1)
            return pts, vals, grads
        # keep the difference stencil inside the closed ball
        h = self.fd_step
        pts = self.points * (1.0 - 2.0 * h)
        vals = np.asarray(f(pts), dtype=float)
        grads = np.empty((len(pts), 3))
        for a in range(3):
            e = np.zeros(3)
            e[a] = h
            grads[:, a] = (np.asarray(f(pts + e)) - np.asarray(f(pts - e))) / (2.0 * h)
        return pts, vals, grads

    def seminorm(self, f: Union[Poly, Callable]) -> float:
        """Pair-sampled [f]_alpha."""
        pts, vals, _ = self._values_and_gradients(f)
        i, j = self._pairs
        return pair_quotient(pts, vals, self.alpha, i, j)

    def norm(self, f: Union[Poly, Callable]) -> float:
        """Surrogate of |f|_{1+alpha} on the closed ball."""
        pts, vals, grads = self._values_and_gradients(f)
        i, j = self._pairs
        return float(
            np.max(np.abs(vals))
            + np.max(np.linalg.norm(grads, axis=1))
            + pair_quotient(pts, grads, self.alpha, i, j)
        )
