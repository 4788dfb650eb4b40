"""Dense polynomials in (x1, x2, x3) with exact coefficient calculus.

A :class:`Poly` stores ``coeffs[i, j, k]``, the coefficient of
``x1**i * x2**j * x3**k``, in a cube of side ``capacity + 1``.  Every linearized
quantity of the solver (Poisson extensions, vertical primitives, equatorial
corrections, gradients and their squares) is closed under the operations
below, so the spectral pipeline never touches a quadrature rule except when
data enters or leaves the sphere.
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

Exponent = Tuple[int, int, int]

# x87 extended precision: monomial coefficients of degree-12 solid harmonics
# reach ~4e3, so float64 storage alone leaves Laplacian residues near 1e-11.
COEFF_DTYPE = np.longdouble


def _cube(capacity: int) -> np.ndarray:
    return np.zeros((capacity + 1,) * 3, dtype=COEFF_DTYPE)


class Poly:
    """Polynomial in three variables.

    Parameters
    ----------
    coeffs : array_like, shape (n, n, n)
        Coefficient cube; entry ``[i, j, k]`` multiplies ``x1^i x2^j x3^k``.
    harmonic : bool
        Tag asserting the Laplacian vanishes.  Set by constructors that
        produce harmonic output; arithmetic keeps it only where harmonicity
        is preserved (sums, scalings, derivatives).
    """

    __slots__ = ("coeffs", "harmonic")

    def __init__(self, coeffs, harmonic: bool = False):
        c = np.array(coeffs, dtype=COEFF_DTYPE)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise ValueError(f"coefficient array must be a cube, got shape {c.shape}")
        self.coeffs = c
        self.harmonic = bool(harmonic)

    # ------------------------------------------------------------------
    # constructors
    @classmethod
    def zero(cls, capacity: int = 0) -> "Poly":
        return cls(_cube(capacity), harmonic=True)

    @classmethod
    def constant(cls, value: float) -> "Poly":
        c = _cube(0)
        c[0, 0, 0] = value
        return cls(c, harmonic=True)

    @classmethod
    def monomial(cls, i: int, j: int, k: int, coef: float = 1.0) -> "Poly":
        c = _cube(i + j + k)
        c[i, j, k] = coef
        return cls(c, harmonic=(i + j + k) <= 1)

    @classmethod
    def variable(cls, axis: int) -> "Poly":
        e = [0, 0, 0]
        e[axis] = 1
        return cls.monomial(*e)

    @classmethod
    def from_terms(cls, terms: Mapping[Exponent, float] | Iterable, harmonic: bool = False) -> "Poly":
        """Build from ``{(i, j, k): coef}`` or an iterable of ``(i, j, k, coef)``."""
        items = terms.items() if isinstance(terms, Mapping) else (((t[0], t[1], t[2]), t[3]) for t in terms)
        items = [((int(i), int(j), int(k)), v) for (i, j, k), v in items]
        if any(min(e) < 0 for e, _ in items):
            raise ValueError("negative exponent")
        cap = max((sum(e) for e, _ in items), default=0)
        c = _cube(cap)
        for (i, j, k), v in items:
            c[i, j, k] += v
        return cls(c, harmonic=harmonic)

    # ------------------------------------------------------------------
    # structure
    @property
    def capacity(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def degree(self) -> int:
        """Maximum total degree of a nonzero term (0 for the zero polynomial)."""
        idx = np.argwhere(self.coeffs != 0.0)
        if idx.size == 0:
            return 0
        return int(idx.sum(axis=1).max())

    @property
    def terms(self) -> Dict[Exponent, float]:
        idx = np.argwhere(self.coeffs != 0.0)
        return {tuple(int(a) for a in e): float(self.coeffs[tuple(e)]) for e in idx}

    def resized(self, capacity: int) -> "Poly":
        """Copy with a coefficient cube of side ``capacity + 1``.

        Shrinking below the degree raises, so no term is ever dropped silently.
        """
        if capacity < self.degree:
            raise ValueError(f"capacity {capacity} below degree {self.degree}")
        c = _cube(capacity)
        n = min(capacity, self.capacity) + 1
        c[:n, :n, :n] = self.coeffs[:n, :n, :n]
        return Poly(c, self.harmonic)

    def trimmed(self) -> "Poly":
        return self.resized(self.degree)

    def max_abs_coeff(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def copy(self) -> "Poly":
        return Poly(self.coeffs.copy(), self.harmonic)

    # ------------------------------------------------------------------
    # arithmetic
    def _aligned(self, other: "Poly") -> Tuple[np.ndarray, np.ndarray]:
        cap = max(self.capacity, other.capacity)
        a = self if self.capacity == cap else self.resized(cap)
        b = other if other.capacity == cap else other.resized(cap)
        return a.coeffs, b.coeffs

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(other)
        a, b = self._aligned(other)
        return Poly(a + b, self.harmonic and other.harmonic)

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.coeffs, self.harmonic)

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(other)
        a, b = self._aligned(other)
        return Poly(a - b, self.harmonic and other.harmonic)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            return self._product(other)
        return Poly(self.coeffs * COEFF_DTYPE(other), self.harmonic)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Poly(self.coeffs / COEFF_DTYPE(scalar), self.harmonic)

    def __pow__(self, n: int):
        if n < 0 or int(n) != n:
            raise ValueError("only non-negative integer powers")
        out = Poly.constant(1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    def _product(self, other: "Poly") -> "Poly":
        a = self.trimmed()
        b = other.trimmed()
        out = _cube(a.capacity + b.capacity)
        # loop over the sparser factor; fixed iteration order keeps results reproducible
        if np.count_nonzero(a.coeffs) > np.count_nonzero(b.coeffs):
            a, b = b, a
        bc = b.coeffs
        n = bc.shape[0]
        for i, j, k in np.argwhere(a.coeffs != 0.0):
            out[i:i + n, j:j + n, k:k + n] += a.coeffs[i, j, k] * bc
        return Poly(out)

    # ------------------------------------------------------------------
    # calculus
    def derivative(self, axis: int) -> "Poly":
        c = self.coeffs
        if c.shape[0] == 1:
            return Poly.zero()
        d = np.moveaxis(c, axis, 0)[1:] * np.arange(1, c.shape[0])[:, None, None]
        pad = np.zeros((1,) + d.shape[1:], dtype=COEFF_DTYPE)
        out = np.moveaxis(np.concatenate([d, pad], axis=0), 0, axis)
        return Poly(out, self.harmonic)

    def gradient(self) -> Tuple["Poly", "Poly", "Poly"]:
        return tuple(self.derivative(a) for a in range(3))

    def laplacian(self) -> "Poly":
        out = self.derivative(0).derivative(0) + self.derivative(1).derivative(1) + self.derivative(2).derivative(2)
        out.harmonic = False
        return out

    def integrate_x3_from_0(self) -> "Poly":
        """Antiderivative in x3 vanishing on the plane x3 = 0."""
        c = self.coeffs
        n = c.shape[0]
        out = _cube(n)
        out[:n, :n, 1:] = c / np.arange(1, n + 1, dtype=COEFF_DTYPE)[None, None, :]
        return Poly(out)

    def restrict_x3_zero(self) -> "Poly":
        """Trace on the plane x3 = 0, as a polynomial in (x1, x2)."""
        out = np.zeros_like(self.coeffs)
        out[:, :, 0] = self.coeffs[:, :, 0]
        return Poly(out)

    def divide_x3(self) -> "Poly":
        """Exact quotient by x3; the x3-free part must already be zero."""
        if np.any(self.coeffs[:, :, 0] != 0.0):
            raise ValueError("polynomial does not vanish on x3 = 0")
        out = np.zeros_like(self.coeffs)
        out[:, :, :-1] = self.coeffs[:, :, 1:]
        return Poly(out)

    def reflect_x3(self) -> "Poly":
        """p(x1, x2, -x3)."""
        n = self.coeffs.shape[0]
        sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0).astype(COEFF_DTYPE)
        return Poly(self.coeffs * sign[None, None, :], self.harmonic)

    def x3_parity_parts(self) -> Tuple["Poly", "Poly"]:
        """Split into (even, odd) parts in x3 by masking exponents."""
        n = self.coeffs.shape[0]
        even = (np.arange(n) % 2 == 0)[None, None, :]
        return Poly(self.coeffs * even, self.harmonic), Poly(self.coeffs * ~even, self.harmonic)

    def evaluate(self, points) -> np.ndarray:
        """Nested Horner evaluation (x3 innermost, then x2, then x1).

        ``points`` has shape ``(..., 3)``; the result has shape ``(...)``.
        Evaluation runs in float64; coefficients are rounded once.
        """
        pts = np.asarray(points, dtype=float)
        shape = pts.shape[:-1]
        pts = pts.reshape(-1, 3)
        c = self.trimmed().coeffs.astype(float)
        d = c.shape[0] - 1
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        # acc[i, j] = sum_k c[i, j, k] z^k; rows with i + j > d - k are still zero at step k
        acc = np.zeros((d + 1, d + 1, len(pts)))
        for k in range(d, -1, -1):
            n = d - k + 1
            acc[:n, :n] = acc[:n, :n] * z + c[:n, :n, k, None]
        acc2 = np.zeros((d + 1, len(pts)))
        for j in range(d, -1, -1):
            n = d - j + 1
            acc2[:n] = acc2[:n] * y + acc[:n, j]
        out = np.zeros(len(pts))
        for i in range(d, -1, -1):
            out = out * x + acc2[i]
        return out.reshape(shape)

    __call__ = evaluate

    # ------------------------------------------------------------------
    def allclose(self, other: "Poly", atol: float = 1e-12) -> bool:
        a, b = self._aligned(other)
        return bool(float(np.max(np.abs(a - b))) <= atol)

    def __repr__(self) -> str:
        terms = sorted(self.terms.items())
        body = " + ".join(f"{v:.6g}*x1^{i}x2^{j}x3^{k}" for (i, j, k), v in terms[:8])
        more = " + ..." if len(terms) > 8 else ""
        return f"Poly({body or '0'}{more})"


HarmonicPoly = Poly

X1 = Poly.variable(0)
X2 = Poly.variable(1)
X3 = Poly.variable(2)


def r_squared() -> Poly:
    return X1 * X1 + X2 * X2 + X3 * X3


def rho_squared() -> Poly:
    """|x'|^2 = x1^2 + x2^2."""
    return X1 * X1 + X2 * X2
