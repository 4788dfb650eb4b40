"""Closed-form kernels of the ball and the equatorial disk.

Points are arrays with the coordinate axis last; every function broadcasts
over leading axes.  The ball dimension defaults to N = 3, the equatorial
disk dimension is d = N - 1 = 2.
"""

from __future__ import annotations

import math
from collections import defaultdict
from functools import lru_cache
from typing import Dict, Sequence, Tuple

import numpy as np

from .errors import DomainError, SingularInputError
from .grids import DiskGrid, SegmentRule

__all__ = [
    "ball_volume",
    "poisson_kernel_ball",
    "grad_poisson_kernel_ball",
    "poisson_kernel_ball_derivative",
    "fundamental_solution",
    "green_disk",
    "poisson_kernel_disk",
    "kernel_K",
]


def ball_volume(n: int) -> float:
    """Volume omega_n of the unit ball in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _sphere_constant(n: int) -> float:
    return 1.0 / (n * ball_volume(n))


def _check_open(x, tol: float = 0.0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(np.sum(x * x, axis=-1) >= 1.0 - tol):
        raise DomainError("kernel evaluated outside the open unit ball")
    return x


def poisson_kernel_ball(x, y, N: int = 3) -> np.ndarray:
    """P_B(x; y) = (1 - |x|^2) / (N omega_N |x - y|^N)."""
    x = _check_open(x)
    y = np.asarray(y, dtype=float)
    z = x - y
    s = np.sum(z * z, axis=-1)
    return _sphere_constant(N) * (1.0 - np.sum(x * x, axis=-1)) / s ** (N / 2.0)


def grad_poisson_kernel_ball(x, y, N: int = 3) -> np.ndarray:
    """Gradient of P_B in x; shape ``broadcast(x, y)``."""
    x = _check_open(x)
    y = np.asarray(y, dtype=float)
    z = x - y
    s = np.sum(z * z, axis=-1)[..., None]
    q = 1.0 - np.sum(x * x, axis=-1)[..., None]
    c = _sphere_constant(N)
    return c * (-2.0 * x / s ** (N / 2.0) - N * q * z / s ** (N / 2.0 + 1.0))


# ----------------------------------------------------------------------
# higher derivatives: term algebra on  coef * x^a * z^b * q^e * s^(-p)
# with z = x - y, q = 1 - |x|^2, s = |z|^2.

_Term = Tuple[Tuple[int, ...], Tuple[int, ...], int, float]


def _differentiate(terms: Dict[_Term, float], j: int) -> Dict[_Term, float]:
    out: Dict[_Term, float] = defaultdict(float)
    for (a, b, e, p), c in terms.items():
        if a[j]:
            a2 = list(a)
            a2[j] -= 1
            out[(tuple(a2), b, e, p)] += c * a[j]
        if b[j]:
            b2 = list(b)
            b2[j] -= 1
            out[(a, tuple(b2), e, p)] += c * b[j]
        if e:
            a2 = list(a)
            a2[j] += 1
            out[(tuple(a2), b, e - 1, p)] += -2.0 * e * c
        b2 = list(b)
        b2[j] += 1
        out[(a, tuple(b2), e, p + 1.0)] += -2.0 * p * c
    return {k: v for k, v in out.items() if v != 0.0}


@lru_cache(maxsize=None)
def _derivative_terms(beta: Tuple[int, ...], N: int) -> Tuple[Tuple[_Term, float], ...]:
    zero = (0,) * N
    terms: Dict[_Term, float] = {(zero, zero, 1, N / 2.0): 1.0}
    for j, order in enumerate(beta):
        for _ in range(order):
            terms = _differentiate(terms, j)
    return tuple(sorted(terms.items()))


def poisson_kernel_ball_derivative(x, y, beta: Sequence[int]) -> np.ndarray:
    """Mixed partial D^beta_x P_B(x; y) by exact differentiation of the rational form."""
    x = _check_open(x)
    y = np.asarray(y, dtype=float)
    N = x.shape[-1]
    beta = tuple(int(b) for b in beta)
    if len(beta) != N:
        raise ValueError(f"multi-index length {len(beta)} does not match dimension {N}")
    z = x - y
    s = np.sum(z * z, axis=-1)
    q = 1.0 - np.sum(x * x, axis=-1)
    out = np.zeros(np.broadcast_shapes(x.shape[:-1], y.shape[:-1]))
    for (a, b, e, p), c in _derivative_terms(beta, N):
        t = c * q ** e / s ** p
        for i in range(N):
            if a[i]:
                t = t * x[..., i] ** a[i]
            if b[i]:
                t = t * z[..., i] ** b[i]
        out = out + t
    return _sphere_constant(N) * out


# ----------------------------------------------------------------------
# disk kernels


def fundamental_solution(z, d: int) -> np.ndarray:
    """Gamma_2 = log(1/|z|) / (2 pi);  Gamma_d = |z|^(2-d) / (d (d-2) omega_d)."""
    z = np.asarray(z, dtype=float)
    r = np.sqrt(np.sum(z * z, axis=-1))
    if np.any(r == 0.0):
        raise SingularInputError("fundamental solution evaluated at its pole")
    if d == 2:
        return -np.log(r) / (2.0 * math.pi)
    if d >= 3:
        return r ** (2 - d) / (d * (d - 2) * ball_volume(d))
    raise ValueError(f"dimension must be >= 2, got {d}")


def green_disk(xp, yp, d: int = 2) -> np.ndarray:
    """Dirichlet Green's function of the unit disk (d = 2).

    The image term uses ``|x'| |I(x') - y'| = sqrt(1 - 2 x'.y' + |x'|^2 |y'|^2)``,
    which is the inversion formula for x' != 0 and its limit 1 at x' = 0.
    """
    if d != 2:
        raise NotImplementedError("only the planar equatorial disk (N = 3) is supported")
    xp = np.asarray(xp, dtype=float)
    yp = np.asarray(yp, dtype=float)
    diff = xp - yp
    dist2 = np.sum(diff * diff, axis=-1)
    if np.any(dist2 == 0.0):
        raise SingularInputError("green_disk evaluated at coincident points")
    img2 = 1.0 - 2.0 * np.sum(xp * yp, axis=-1) + np.sum(xp * xp, axis=-1) * np.sum(yp * yp, axis=-1)
    # both distances squared: log(a/b) = (log a^2 - log b^2) / 2
    return (np.log(img2) - np.log(dist2)) / (4.0 * math.pi)


def poisson_kernel_disk(xp, yp, d: int = 2) -> np.ndarray:
    """P_D(x'; y') = (1 - |x'|^2) / (d omega_d |x' - y'|^d) for y' on the rim."""
    xp = _check_open(xp)
    yp = np.asarray(yp, dtype=float)
    diff = xp - yp
    dist2 = np.sum(diff * diff, axis=-1)
    return (1.0 - np.sum(xp * xp, axis=-1)) / (d * ball_volume(d) * dist2 ** (d / 2.0))


# ----------------------------------------------------------------------
# composite kernel


def kernel_K(x, y, segment: SegmentRule, disk: DiskGrid, chunk: int = 512) -> np.ndarray:
    """Quadrature approximation of K(x; y) for one interior x and many y on S.

    K(x; y) = int_0^{x3} P_B(x', t; y) dt + int_D G_D(x', z') d/dx3 P_B(z', 0; y) dz'

    Cost is ``disk.size * len(y)``; this is a validation route, the solver
    itself never assembles K.
    """
    x = _check_open(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    vertical = np.sum(segment.weights[:, None] * poisson_kernel_ball(segment.nodes[:, None, :], y[None, :, :]), axis=0)
    zp = disk.nodes
    G = green_disk(x[:2][None, :], zp) * disk.weights
    planar = np.zeros(len(y))
    pts = np.zeros((len(zp), 3))
    pts[:, :2] = zp
    for start in range(0, len(y), chunk):
        yy = y[start:start + chunk]
        dP = grad_poisson_kernel_ball(pts[:, None, :], yy[None, :, :])[..., 2]
        planar[start:start + chunk] = np.sum(G[:, None] * dP, axis=0)
    return vertical + planar
