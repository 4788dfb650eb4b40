"""The equatorial Dirichlet problem  -Lap' Z = f  in D,  Z = psi  on the rim.

Spectral route: ``f`` is a polynomial in (x1, x2), rewritten in polar form
``sum c_mk r^k trig(m theta)`` and inverted mode by mode; ``psi`` is a finite
Fourier series extended as ``r^m trig(m theta)``.  The result converts back
to an exact polynomial.

Quadrature route: the Green's function integral over a disk grid plus the
disk Poisson integral over the rim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from .errors import DomainError, PreconditionError
from .grids import DiskField, check_interior, rim_rule
from .kernels import green_disk, poisson_kernel_disk
from .poly import COEFF_DTYPE, Poly

__all__ = [
    "DiskPoly",
    "EquatorData",
    "solve_disk_spectral",
    "solve_disk_green",
    "rim_integral",
]


# ----------------------------------------------------------------------
# polar form of monomials


@lru_cache(maxsize=None)
def _monomial_fourier(i: int, j: int) -> Tuple[Tuple[int, float, float], ...]:
    """cos^i t sin^j t as ``((m, a_m, b_m), ...)`` meaning sum a_m cos(mt) + b_m sin(mt).

    Uses cos t = (z + 1/z)/2 and sin t = (z - 1/z)/(2i) with integer
    arithmetic, so the coefficients are exact dyadic rationals.
    """
    n = i + j
    # coefficients of z^(p - n), p = 0..2n
    poly = [1]
    for _ in range(i):
        poly = _convolve(poly, [1, 0, 1])
    for _ in range(j):
        poly = _convolve(poly, [-1, 0, 1])
    # divide by 2^n * i^j: the result is real when j is even, imaginary otherwise
    scale = 2 ** n
    out = []
    for m in range(n + 1):
        c_pos = poly[n + m]
        c_neg = poly[n - m]
        if j % 2 == 0:
            sgn = (-1) ** (j // 2)
            if m == 0:
                a = sgn * c_pos / scale
            else:
                a = sgn * (c_pos + c_neg) / scale
            b = 0.0
        else:
            # 1 / i^j = -i (-1)^((j-1)/2); c z^m + c' z^-m contributes to sin(mt)
            sgn = (-1) ** ((j - 1) // 2)
            a = 0.0
            b = sgn * (c_pos - c_neg) / scale
        if a != 0.0 or b != 0.0:
            out.append((m, float(a), float(b)))
    return tuple(out)


def _convolve(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for a, x in enumerate(p):
        if x:
            for b, y in enumerate(q):
                out[a + b] += x * y
    return out


@lru_cache(maxsize=None)
def _trig_times_rpow(m: int, q: int, sine: bool) -> Dict[Tuple[int, int], int]:
    """(x^2 + y^2)^q * Re or Im of (x + iy)^m as an integer polynomial in (x, y)."""
    trig: Dict[Tuple[int, int], int] = {}
    for a in range(m + 1):
        c = math.comb(m, a)
        if sine and a % 2 == 1:
            trig[(m - a, a)] = c * (-1) ** ((a - 1) // 2)
        elif not sine and a % 2 == 0:
            trig[(m - a, a)] = c * (-1) ** (a // 2)
    out: Dict[Tuple[int, int], int] = {}
    for u in range(q + 1):
        c = math.comb(q, u)
        for (a, b), t in trig.items():
            key = (a + 2 * u, b + 2 * (q - u))
            out[key] = out.get(key, 0) + c * t
    return out


@dataclass(frozen=True, eq=False)
class DiskPoly:
    """``sum_{m,k} (cos[m, k] cos(m t) + sin[m, k] sin(m t)) r^k`` on the disk.

    Terms with ``k < m`` or odd ``k - m`` are not polynomials in (x1, x2) and
    are rejected by :meth:`to_poly`.
    """

    cos: np.ndarray
    sin: np.ndarray

    def __post_init__(self):
        c = np.array(self.cos, dtype=COEFF_DTYPE)
        s = np.array(self.sin, dtype=COEFF_DTYPE)
        if c.shape != s.shape or c.ndim != 2:
            raise ValueError("cos and sin tables must share a 2-D shape (M + 1, K + 1)")
        object.__setattr__(self, "cos", c)
        object.__setattr__(self, "sin", s)

    @classmethod
    def zeros(cls, M: int, K: int) -> "DiskPoly":
        z = np.zeros((M + 1, K + 1), dtype=COEFF_DTYPE)
        return cls(z, z.copy())

    @property
    def max_order(self) -> int:
        return self.cos.shape[0] - 1

    @property
    def max_radial_degree(self) -> int:
        return self.cos.shape[1] - 1

    @classmethod
    def from_poly(cls, p: Poly) -> "DiskPoly":
        """Polar form of a polynomial in (x1, x2); any x3 dependence is rejected."""
        if np.any(p.coeffs[:, :, 1:] != 0.0):
            raise PreconditionError("disk polynomial must not depend on x3")
        n = p.degree
        out = cls.zeros(n, n)
        c2 = p.coeffs[:, :, 0]
        for i, j in np.argwhere(c2 != 0.0):
            coef = c2[i, j]
            for m, a, b in _monomial_fourier(int(i), int(j)):
                out.cos[m, i + j] += coef * COEFF_DTYPE(a)
                out.sin[m, i + j] += coef * COEFF_DTYPE(b)
        return out

    def to_poly(self) -> Poly:
        """Exact conversion using r^k trig(m t) = r^(k-m) Re/Im (x1 + i x2)^m."""
        M, K = self.max_order, self.max_radial_degree
        cube = np.zeros((K + 1,) * 3, dtype=COEFF_DTYPE)
        for table, sine in ((self.cos, False), (self.sin, True)):
            for m, k in np.argwhere(table != 0.0):
                if k < m or (k - m) % 2:
                    raise PreconditionError(f"term r^{k} trig({m} t) is not a polynomial in x'")
                for (a, b), c in _trig_times_rpow(int(m), int((k - m) // 2), sine).items():
                    cube[a, b, 0] += table[m, k] * COEFF_DTYPE(c)
        return Poly(cube)

    def evaluate(self, xp) -> np.ndarray:
        """Values at planar points ``xp`` of shape (..., 2)."""
        xp = np.asarray(xp, dtype=float)
        r = np.hypot(xp[..., 0], xp[..., 1])
        t = np.arctan2(xp[..., 1], xp[..., 0])
        out = np.zeros(r.shape)
        for m in range(self.max_order + 1):
            rc = np.polynomial.polynomial.polyval(r, self.cos[m].astype(float))
            rs = np.polynomial.polynomial.polyval(r, self.sin[m].astype(float))
            out = out + rc * np.cos(m * t) + rs * np.sin(m * t)
        return out

    __call__ = evaluate

    def __add__(self, other: "DiskPoly") -> "DiskPoly":
        M = max(self.max_order, other.max_order)
        K = max(self.max_radial_degree, other.max_radial_degree)
        out = DiskPoly.zeros(M, K)
        for src in (self, other):
            m, k = src.cos.shape
            out.cos[:m, :k] += src.cos
            out.sin[:m, :k] += src.sin
        return out


# ----------------------------------------------------------------------
# rim data


@dataclass(frozen=True, eq=False)
class EquatorData:
    """Finite Fourier series ``psi(t) = sum_m a[m] cos(m t) + b[m] sin(m t)`` on the rim."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("Fourier tables must be 1-D and of equal length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def constant(cls, h: float) -> "EquatorData":
        return cls([float(h)], [0.0])

    @classmethod
    def from_samples(cls, values, M: Optional[int] = None) -> "EquatorData":
        """Trapezoid (FFT) coefficients from samples at angles ``2 pi k / n``."""
        v = np.asarray(values, dtype=float)
        n = v.size
        M = (n - 1) // 2 if M is None else int(M)
        if 2 * M >= n:
            raise ValueError(f"{n} samples resolve at most order {(n - 1) // 2}")
        F = np.fft.rfft(v) / n
        a = 2.0 * F.real[: M + 1]
        b = -2.0 * F.imag[: M + 1]
        a[0] /= 2.0
        b[0] = 0.0
        return cls(a, b)

    @classmethod
    def from_function(cls, func: Callable, M: int) -> "EquatorData":
        n = 4 * M + 4
        ang, _ = rim_rule(n)
        return cls.from_samples(func(ang), M)

    @classmethod
    def coerce(cls, psi) -> "EquatorData":
        if isinstance(psi, EquatorData):
            return psi
        if psi is None:
            return cls.constant(0.0)
        if isinstance(psi, (int, float, np.integer, np.floating)) and not isinstance(psi, bool):
            return cls.constant(float(psi))
        raise TypeError(f"cannot interpret {type(psi).__name__} as rim data")

    @property
    def max_order(self) -> int:
        return self.a.size - 1

    def is_constant(self) -> bool:
        return bool(np.all(self.a[1:] == 0.0) and np.all(self.b == 0.0))

    def evaluate(self, theta) -> np.ndarray:
        t = np.asarray(theta, dtype=float)
        m = np.arange(self.a.size)
        return np.cos(np.multiply.outer(t, m)) @ self.a + np.sin(np.multiply.outer(t, m)) @ self.b

    __call__ = evaluate

    def harmonic_extension(self) -> DiskPoly:
        M = self.max_order
        out = DiskPoly.zeros(M, M)
        for m in range(M + 1):
            out.cos[m, m] = self.a[m]
            out.sin[m, m] = self.b[m]
        return out


# ----------------------------------------------------------------------
# spectral solve


def solve_disk_spectral(rhs: Poly, psi=0.0) -> DiskPoly:
    """Exact solution of -Lap' Z = rhs in D, Z = psi on the rim.

    A source term ``c r^k trig(m t)`` contributes
    ``c (r^m - r^(k+2)) trig(m t) / ((k+2)^2 - m^2)``, which vanishes on the
    rim and has Laplacian ``-c r^k trig(m t)``.
    """
    src = DiskPoly.from_poly(rhs)
    psi = EquatorData.coerce(psi)
    M, K = src.max_order, src.max_radial_degree
    z2 = DiskPoly.zeros(M, K + 2)
    for table, dest in ((src.cos, z2.cos), (src.sin, z2.sin)):
        for m, k in np.argwhere(table != 0.0):
            den = (k + 2) ** 2 - m ** 2
            if den == 0:
                raise PreconditionError(f"resonant source r^{k} trig({m} t) needs an r^m log r term")
            c = table[m, k] / COEFF_DTYPE(den)
            dest[m, m] += c
            dest[m, k + 2] -= c
    return z2 + psi.harmonic_extension()


# ----------------------------------------------------------------------
# quadrature solve


def rim_integral(psi, xp, n_min: int = 64, n_max: int = 20000) -> np.ndarray:
    """int_E P_D(x'; y') psi(y') dS by the trapezoid rule.

    The node count grows like ``36 / (1 - |x'|)``, enough for the geometric
    convergence of the periodic rule against the kernel peak.
    """
    xp = np.atleast_2d(np.asarray(xp, dtype=float))
    if isinstance(psi, EquatorData):
        f = psi.evaluate
    elif callable(psi):
        f = psi
    else:
        h = float(psi)
        return np.full(len(xp), h)
    out = np.empty(len(xp))
    for n, p in enumerate(xp):
        r = math.hypot(p[0], p[1])
        if r >= 1.0:
            raise DomainError("rim integral requested outside the open disk")
        count = int(min(n_max, max(n_min, math.ceil(36.0 / (1.0 - r)))))
        ang, wt = rim_rule(count)
        y = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        out[n] = np.sum(poisson_kernel_disk(p, y) * wt * f(ang))
    return out


def solve_disk_green(rhs: DiskField, psi, xp) -> np.ndarray:
    """Z(x') = int_D G_D(x', z') rhs(z') dz' + int_E P_D(x'; y') psi dS.

    The logarithmic singularity is tamed by subtracting the source value at
    the target, using ``int_D G_D(x', z') dz' = (1 - |x'|^2) / 4``.  Without a
    generating callable the value at the nearest grid node is subtracted.
    """
    xp = np.atleast_2d(np.asarray(xp, dtype=float))
    if np.any(np.sum(xp * xp, axis=-1) >= 1.0):
        raise DomainError("disk solve requested outside the open disk")
    grid = rhs.grid
    f = rhs.values
    if rhs.func is not None:
        f0 = np.asarray(rhs.func(xp), dtype=float)
    else:
        near = np.argmin(np.sum((xp[:, None, :] - grid.nodes[None, :, :]) ** 2, axis=-1), axis=1)
        f0 = f[near]
    out = np.empty(len(xp))
    for n, p in enumerate(xp):
        diff = grid.nodes - p
        hit = np.sum(diff * diff, axis=-1) == 0.0
        G = np.zeros(grid.size)
        G[~hit] = green_disk(p[None, :], grid.nodes[~hit])
        out[n] = f0[n] * (1.0 - p @ p) / 4.0 + np.sum(G * grid.weights * (f - f0[n]))
    return out + rim_integral(psi, xp)
