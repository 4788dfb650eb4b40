"""The linearized problem  Lap v = 0 in B,  d v/d x3 = phi on S,  v = psi on E.

The solution is ``v = W + Z`` where ``w`` is the Poisson extension of
``phi``, ``W`` its vertical primitive and ``Z`` solves the equatorial
Dirichlet problem ``-Lap' Z = dw/dx3(x', 0)``, ``Z = psi`` on the rim.

Two independent routes share this structure:

* ``spectral``: every piece is an exact polynomial;
* ``kernel``: ``w`` and ``dw/dx3`` come from Poisson-kernel quadrature, ``W``
  from a Gauss rule on the vertical segment and ``Z`` from the disk Green's
  function.  This is the integral representation with the composite kernel
  ``K`` evaluated in the order (sphere first, then disk and segment).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from .disk_poisson import EquatorData, rim_integral, solve_disk_green, solve_disk_spectral
from .errors import DomainError, PreconditionError, ResolutionError
from .grids import (
    DiskField,
    SphereField,
    build_disk_grid,
    build_sphere_grid,
    check_interior,
    gauss_legendre,
)
from .harmonic_ext import (
    DEFAULT_QUADRATURE,
    QuadratureOptions,
    SphereExpansion,
    equatorial_normal_trace,
    poisson_extend_spectral,
    poisson_integral,
    project_sphere,
    vertical_primitive,
)
from .poly import Poly

__all__ = [
    "KernelOptions",
    "KernelPath",
    "LinearizedSolution",
    "OmegaField",
    "solve_linearized",
    "evaluate_kernel_K_path",
    "harmonic_residual",
    "omega_quotient",
]


@dataclass(frozen=True)
class KernelOptions:
    """Grids of the kernel route (sphere 64x128, disk 64x128 graded 2, 16-point segments)."""

    sphere: Tuple[int, int] = (64, 128)
    disk: Tuple[int, int] = (64, 128)
    grading: float = 2.0
    segment_nodes: int = 16
    quadrature: QuadratureOptions = field(default_factory=lambda: DEFAULT_QUADRATURE)
    richardson_eps: float = 0.01


class KernelPath:
    """Quadrature evaluation of ``v = W + Z`` for sphere data given as a callable.

    The equatorial source ``dw/dx3(z', 0)`` is computed once on the disk grid;
    each target then costs one segment rule and one Green's-function sum.
    """

    def __init__(self, phi, psi=0.0, options: KernelOptions = KernelOptions()):
        if isinstance(phi, SphereField):
            func = phi.func
            if func is None:
                raise ResolutionError("the kernel route needs a generating function for phi")
        elif isinstance(phi, SphereExpansion):
            func = phi.evaluate
        elif callable(phi):
            func = phi
        else:
            raise TypeError("phi must be a SphereField, SphereExpansion or callable")
        self.options = options
        self.func = func
        self.psi = psi if callable(psi) and not isinstance(psi, EquatorData) else EquatorData.coerce(psi)
        self.sphere_field = SphereField.from_function(build_sphere_grid(*options.sphere), func)
        self.disk_grid = build_disk_grid(options.disk[0], options.disk[1], options.grading)
        self._s, self._ws = gauss_legendre(options.segment_nodes, 0.0, 1.0)
        self.disk_source = DiskField(
            self.disk_grid,
            self.equatorial_source(self.disk_grid.nodes),
            self.equatorial_source,
        )

    def _w(self, pts, beta=(0, 0, 0)) -> np.ndarray:
        return poisson_integral(self.sphere_field, pts, beta, self.options.quadrature)

    def equatorial_source(self, xp) -> np.ndarray:
        """dw/dx3 at (x', 0)."""
        xp = np.atleast_2d(np.asarray(xp, dtype=float))
        pts = np.zeros((len(xp), 3))
        pts[:, :2] = xp
        return self._w(pts, (0, 0, 1))

    def W(self, x) -> np.ndarray:
        x = check_interior(x)
        seg = np.repeat(x[:, None, :], len(self._s), axis=1)
        seg[:, :, 2] = x[:, 2:3] * self._s[None, :]
        vals = self._w(seg.reshape(-1, 3)).reshape(len(x), -1)
        return x[:, 2] * (vals @ self._ws)

    def Z(self, xp) -> np.ndarray:
        return solve_disk_green(self.disk_source, self.psi, np.atleast_2d(xp))

    def evaluate(self, x) -> np.ndarray:
        x = check_interior(x)
        return self.W(x) + self.Z(x[:, :2])

    __call__ = evaluate

    def boundary_values(self, y) -> np.ndarray:
        """Values on S by Richardson extrapolation from radii 1 - 2 eps and 1 - eps.

        Points on the equator ring are refused: there the oblique field is
        tangential and the kernel route has no boundary limit to offer.
        """
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if np.any(np.abs(np.linalg.norm(y, axis=1) - 1.0) > 1e-12):
            raise DomainError("boundary values need unit vectors")
        if np.any(np.abs(y[:, 2]) < 1e-12):
            raise DomainError("the kernel route is not evaluated on the equator ring")
        e = self.options.richardson_eps
        return 2.0 * self.evaluate((1.0 - e) * y) - self.evaluate((1.0 - 2.0 * e) * y)


@dataclass(eq=False)
class LinearizedSolution:
    """Solution ``v = W + Z`` with its parts and diagnostics.

    Spectral solutions carry exact polynomials ``v``, ``w``, ``W`` and ``Z``
    (``Z`` depends on x1, x2 only).  Kernel solutions carry a
    :class:`KernelPath` evaluator instead.
    """

    path: str
    psi: EquatorData
    v: Optional[Poly] = None
    w: Optional[Poly] = None
    W: Optional[Poly] = None
    Z: Optional[Poly] = None
    phi: Optional[SphereExpansion] = None
    kernel: Optional[KernelPath] = None
    residuals: Dict[str, float] = field(default_factory=dict)

    def evaluate(self, x) -> np.ndarray:
        if self.path == "spectral":
            return self.v(np.asarray(x, dtype=float))
        return self.kernel.evaluate(x)

    __call__ = evaluate

    def gradient_polys(self) -> Tuple[Poly, Poly, Poly]:
        if self.v is None:
            raise PreconditionError("exact gradients exist on the spectral route only")
        return self.v.gradient()

    def gradient(self, x) -> np.ndarray:
        """Exact gradient at ``x`` (spectral route), shape (..., 3)."""
        return np.stack([g(np.asarray(x, dtype=float)) for g in self.gradient_polys()], axis=-1)


def _spectral_residuals(v: Poly, w: Poly, Z: Poly, psi: EquatorData) -> Dict[str, float]:
    t = 2.0 * np.pi * np.arange(256) / 256
    rim = np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1)
    return {
        "laplacian_max_coeff": v.laplacian().max_abs_coeff(),
        "dx3_minus_w_max_coeff": (v.derivative(2) - w).max_abs_coeff(),
        "equator_max_error": float(np.max(np.abs(v(rim) - psi.evaluate(t)))),
        "plane_trace_minus_Z_max_coeff": (v.restrict_x3_zero() - Z).max_abs_coeff(),
    }


def solve_linearized(
    phi: Union[SphereExpansion, SphereField, Callable],
    psi=0.0,
    path: str = "spectral",
    L: Optional[int] = None,
    options: KernelOptions = KernelOptions(),
) -> LinearizedSolution:
    """Solve the linearized oblique problem by the spectral or the kernel route.

    Parameters
    ----------
    phi
        Oblique data on S.  The spectral route needs a
        :class:`SphereExpansion`, or a field/callable together with ``L`` (it
        is then projected).  The kernel route needs a callable or a
        :class:`SphereField` with its generating function.
    psi
        Rim data: a constant, an :class:`EquatorData`, or (kernel route only)
        a callable of the rim angle.
    """
    if path == "spectral":
        if not isinstance(phi, SphereExpansion):
            if L is None:
                raise PreconditionError("the spectral route needs an expansion or a degree L")
            phi = project_sphere(phi, L)
        psi = EquatorData.coerce(psi)
        w = poisson_extend_spectral(phi)
        W = vertical_primitive(w)
        Z = solve_disk_spectral(equatorial_normal_trace(w), psi).to_poly()
        v = W + Z
        return LinearizedSolution(
            "spectral", psi, v=v, w=w, W=W, Z=Z, phi=phi,
            residuals=_spectral_residuals(v, w, Z, psi),
        )
    if path == "kernel":
        kp = KernelPath(phi, psi, options)
        return LinearizedSolution("kernel", kp.psi if isinstance(kp.psi, EquatorData) else EquatorData.constant(0.0), kernel=kp)
    raise ValueError(f"unknown path {path!r}; use 'spectral' or 'kernel'")


def evaluate_kernel_K_path(phi, psi, x, options: KernelOptions = KernelOptions()) -> np.ndarray:
    """v(x) = int_S K(x; y) phi(y) dS + int_E P_D(x'; y') psi(y') dS by quadrature."""
    return KernelPath(phi, psi, options).evaluate(x)


def harmonic_residual(sol: LinearizedSolution, probe, h: Optional[float] = None) -> float:
    """Max |Lap v| over interior probe points.

    Spectral route: exact polynomial Laplacian, evaluated.  Kernel route:
    7-point centred differences with spacing ``h`` (all stencil points must
    stay inside the ball).
    """
    pts = check_interior(probe, "probe point")
    if sol.path == "spectral":
        return float(np.max(np.abs(sol.v.laplacian()(pts))))
    if h is None:
        raise PreconditionError("the kernel route needs a finite-difference spacing h")
    offsets = np.vstack([np.zeros(3), h * np.eye(3), -h * np.eye(3)])
    stencil = (pts[:, None, :] + offsets[None, :, :]).reshape(-1, 3)
    vals = sol.evaluate(stencil).reshape(len(pts), 7)
    lap = (np.sum(vals[:, 1:], axis=1) - 6.0 * vals[:, 0]) / (h * h)
    return float(np.max(np.abs(lap)))


# ----------------------------------------------------------------------
# the quotient omega = v / x3


@dataclass(frozen=True, eq=False)
class OmegaField:
    """``omega = v / x3`` off the equatorial plane, ``dv/dx3(x', 0)`` on it.

    ``omega`` is the exact polynomial quotient; ``v`` is kept for the
    two-sided sampling checks.
    """

    omega: Poly
    v: Poly

    def evaluate(self, x) -> np.ndarray:
        """Pointwise definition: v / x3 where x3 != 0, dv/dx3 on the plane."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(len(x))
        on = x[:, 2] == 0.0
        off = ~on
        out[off] = self.v(x[off]) / x[off, 2]
        out[on] = self.v.derivative(2)(x[on])
        return out

    __call__ = evaluate

    def plane_gap(self, xp, eps: float = 1e-6) -> float:
        """Largest difference between the two one-sided values at height eps and the plane value."""
        xp = np.atleast_2d(np.asarray(xp, dtype=float))
        z = np.zeros((len(xp), 1))
        on = self.evaluate(np.hstack([xp, z]))
        up = self.evaluate(np.hstack([xp, z + eps]))
        down = self.evaluate(np.hstack([xp, z - eps]))
        return float(max(np.max(np.abs(up - on)), np.max(np.abs(down - on))))


def omega_quotient(sol: LinearizedSolution, tol: float = 1e-12) -> OmegaField:
    """Exact quotient v / x3; requires v = 0 on the plane x3 = 0."""
    if sol.v is None:
        raise PreconditionError("omega is formed from the exact spectral solution")
    v = sol.v
    trace = v.coeffs[:, :, 0]
    scale = max(1.0, v.max_abs_coeff())
    if np.max(np.abs(trace)) > tol * scale:
        raise PreconditionError("v does not vanish on the equatorial plane")
    c = v.coeffs.copy()
    c[:, :, 0] = 0.0
    clean = Poly(c, v.harmonic)
    return OmegaField(clean.divide_x3(), clean)
