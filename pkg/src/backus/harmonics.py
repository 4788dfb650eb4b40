"""Real spherical harmonics on S and their solid-harmonic polynomial extensions.

Basis (no Condon-Shortley phase), orthonormal in L^2(S)::

    Y_l0       = sqrt((2l+1)/(4 pi)) P_l(cos t)
    Y_lm, m>0  = sqrt(2) sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m(cos t) cos(m az)
    Y_l,-m     = same with sin(m az)

Coefficient arrays have shape ``(L + 1, 2L + 1)`` with ``[l, L + m]`` holding
the coefficient of ``Y_lm``; entries with ``|m| > l`` stay zero.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from .poly import COEFF_DTYPE, Poly

_PI_LD = COEFF_DTYPE("3.14159265358979323846264338327950288")


def legendre_table(L: int, t) -> np.ndarray:
    """Normalized associated Legendre values, shape ``(L + 1, L + 1, n)``.

    Entry ``[l, m]`` is the theta-part of ``Y_lm`` for ``m >= 0`` (including the
    sqrt(2) factor for m > 0), computed by the standard stable three-term
    recurrence in l.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = np.sqrt(np.clip((1.0 - t) * (1.0 + t), 0.0, None))
    Q = np.zeros((L + 1, L + 1, t.size))
    Q[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, L + 1):
        Q[m, m] = math.sqrt((2 * m + 1) / (2.0 * m)) * s * Q[m - 1, m - 1]
    for m in range(0, L):
        Q[m + 1, m] = math.sqrt(2 * m + 3) * t * Q[m, m]
    for m in range(0, L + 1):
        for l in range(m + 2, L + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            Q[l, m] = a * (t * Q[l - 1, m] - b * Q[l - 2, m])
    Q[:, 1:] *= math.sqrt(2.0)
    return Q


def azimuthal_table(L: int, az) -> np.ndarray:
    """Rows ``[L + m]``: sin(|m| az) for m < 0, 1 for m = 0, cos(m az) for m > 0."""
    az = np.atleast_1d(np.asarray(az, dtype=float))
    A = np.empty((2 * L + 1, az.size))
    for m in range(-L, L + 1):
        if m < 0:
            A[L + m] = np.sin(-m * az)
        elif m == 0:
            A[L] = 1.0
        else:
            A[L + m] = np.cos(m * az)
    return A


def real_sph_harm(L: int, points) -> np.ndarray:
    """Values ``Y_lm(y)`` at directions ``y``, shape ``(L + 1, 2L + 1, n)``."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(p, axis=-1)
    r = np.where(r == 0.0, 1.0, r)
    t = p[:, 2] / r
    az = np.arctan2(p[:, 1], p[:, 0])
    Q = legendre_table(L, t)
    A = azimuthal_table(L, az)
    Y = np.zeros((L + 1, 2 * L + 1, p.shape[0]))
    for m in range(-L, L + 1):
        Y[abs(m):, L + m] = Q[abs(m):, abs(m)] * A[L + m][None, :]
    return Y


def lm_mask(L: int) -> np.ndarray:
    """Boolean mask of valid ``(l, L + m)`` slots."""
    l = np.arange(L + 1)[:, None]
    m = np.arange(-L, L + 1)[None, :]
    return np.abs(m) <= l


# ----------------------------------------------------------------------
# solid harmonics as exact polynomials


def _legendre_derivative_coeffs(l: int, m: int) -> Dict[int, Fraction]:
    """Coefficients of t^j in d^m/dt^m P_l(t), exactly."""
    out: Dict[int, Fraction] = {}
    for k in range(l // 2 + 1):
        j = l - 2 * k
        if j < m:
            continue
        c = (-1) ** k * math.comb(l, k) * math.comb(2 * l - 2 * k, l)
        out[j - m] = Fraction(c * math.factorial(j) // math.factorial(j - m), 2 ** l)
    return out


def _trig_part(m: int) -> Tuple[Dict[Tuple[int, int], int], Dict[Tuple[int, int], int]]:
    """Re and Im of (x + i y)^m as integer polynomials {(i, j): c}."""
    re: Dict[Tuple[int, int], int] = {}
    im: Dict[Tuple[int, int], int] = {}
    for a in range(m + 1):
        c = math.comb(m, a)
        if a % 2 == 0:
            re[(m - a, a)] = c * (-1) ** (a // 2)
        else:
            im[(m - a, a)] = c * (-1) ** ((a - 1) // 2)
    return re, im


def _r_power(q: int) -> Dict[Tuple[int, int, int], int]:
    """(x^2 + y^2 + z^2)^q as an integer polynomial."""
    out = {}
    fq = math.factorial(q)
    for u in range(q + 1):
        for v in range(q - u + 1):
            w = q - u - v
            out[(2 * u, 2 * v, 2 * w)] = fq // (math.factorial(u) * math.factorial(v) * math.factorial(w))
    return out


def _ld(q: Fraction):
    return COEFF_DTYPE(q.numerator) / COEFF_DTYPE(q.denominator)


def sh_norm(l: int, m: int):
    """Normalization constant of Y_lm, in extended precision."""
    am = abs(m)
    c = _ld(Fraction((2 * l + 1) * math.factorial(l - am), math.factorial(l + am))) / (4 * _PI_LD)
    if am:
        c = 2 * c
    return np.sqrt(c)


@lru_cache(maxsize=None)
def _solid_harmonic_cube(l: int, m: int) -> np.ndarray:
    am = abs(m)
    dleg = _legendre_derivative_coeffs(l, am)
    re, im = _trig_part(am)
    trig = im if m < 0 else re
    radial: Dict[Tuple[int, int, int], Fraction] = {}
    for j, pj in dleg.items():
        q2 = l - am - j
        if q2 % 2:
            continue
        for (a, b, c), mult in _r_power(q2 // 2).items():
            key = (a, b, c + j)
            radial[key] = radial.get(key, Fraction(0)) + pj * mult
    total: Dict[Tuple[int, int, int], Fraction] = {}
    for (ti, tj), tc in trig.items():
        for (a, b, c), rc in radial.items():
            key = (a + ti, b + tj, c)
            total[key] = total.get(key, Fraction(0)) + rc * tc
    cube = np.zeros((l + 1,) * 3, dtype=COEFF_DTYPE)
    nrm = sh_norm(l, m)
    for (a, b, c), v in total.items():
        if v != 0:
            cube[a, b, c] = _ld(v) * nrm
    cube.setflags(write=False)
    return cube


def solid_harmonic(l: int, m: int) -> Poly:
    """Homogeneous harmonic polynomial of degree l equal to Y_lm on S."""
    if abs(m) > l or l < 0:
        raise ValueError(f"invalid (l, m) = ({l}, {m})")
    return Poly(_solid_harmonic_cube(l, m).copy(), harmonic=True)


def solid_harmonic_sum(coeffs: np.ndarray) -> Poly:
    """Polynomial sum_lm coeffs[l, L + m] * solid_harmonic(l, m)."""
    coeffs = np.asarray(coeffs, dtype=float)
    L = coeffs.shape[0] - 1
    out = np.zeros((L + 1,) * 3, dtype=COEFF_DTYPE)
    for l in range(L + 1):
        for m in range(-l, l + 1):
            a = coeffs[l, L + m]
            if a != 0.0:
                out[: l + 1, : l + 1, : l + 1] += COEFF_DTYPE(a) * _solid_harmonic_cube(l, m)
    return Poly(out, harmonic=True)
