"""Fixed-point solution of the interior Backus problem near the laminar potential x3.

With ``u = x3 + v`` the boundary condition ``|grad u|^2 = g^2`` on S reads

    2 dv/dx3 + |grad v|^2 = g^2 - 1,

and ``dv/dx3 = phi`` on S.  The maps

    Psi_g[phi]       = (g^2 - 1 - T[phi]) / 2,          T[phi] = |grad v|^2, v = 0 on E
    Psi~_{g,h}[phi]  = (g^2 - 1 - T~_h[phi]) / 2,       T~_h[phi] = J[|grad v|^2], v = h on E

are iterated from ``phi = 0`` in the even (odd solution) or the axisymmetric
class.  Iterates live in the spectral space of degree ``L``; ``T`` has degree
``2L`` and is projected back to ``L`` at every step with the discarded tail
logged.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError, ConvergenceError, DomainError, SymmetryError
from .grids import SphereField, SphereGrid
from .harmonic_ext import SYMMETRY_TOL, SphereExpansion, poisson_extend_spectral, project_sphere, working_grid
from .linearized import LinearizedSolution, solve_linearized
from .norms import HolderMonitor
from .poly import X3, Poly

__all__ = [
    "BoundaryData",
    "SolverConfig",
    "FixedPointReport",
    "TResult",
    "operator_T",
    "operator_T_tilde",
    "cutoff_eta",
    "glue_J",
    "psi_step",
    "fixed_point_solve",
    "project_symmetry",
]

MODES = ("odd", "axisymmetric")


# ----------------------------------------------------------------------
# symmetry classes


def _mode_tags(mode: str) -> dict:
    if mode == "odd":
        return {"even": True}
    if mode in ("axisymmetric", "axisym"):
        return {"axisymmetric": True}
    raise ValueError(f"unknown mode {mode!r}; use 'odd' or 'axisymmetric'")


def project_symmetry(exp: SphereExpansion, mode: str) -> SphereExpansion:
    """Orthogonal projection onto the even, odd or axisymmetric subspace."""
    c = exp.coeffs.copy()
    L = exp.L
    l = np.arange(L + 1)[:, None]
    m = np.arange(-L, L + 1)[None, :]
    if mode == "even":
        c[(l + m) % 2 == 1] = 0.0
        return SphereExpansion(c, even=True)
    if mode == "odd":
        c[(l + m) % 2 == 0] = 0.0
        return SphereExpansion(c, odd=True)
    if mode in ("axisymmetric", "axisym"):
        c[:, np.arange(2 * L + 1) != L] = 0.0
        return SphereExpansion(c, axisymmetric=True)
    raise ValueError(f"unknown symmetry {mode!r}")


# ----------------------------------------------------------------------
# cut-off and gluing


def _bump_tail(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0.0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def cutoff_eta(t) -> np.ndarray:
    """Smooth even cut-off: 1 for |t| <= 1/3, 0 for |t| >= 2/3.

    Built from exp(-1/s), so the plateaus are exact and the transition is
    C-infinity and monotone.
    """
    t = np.asarray(t, dtype=float)
    s = 3.0 * np.abs(t) - 1.0
    a = _bump_tail(1.0 - s)
    b = _bump_tail(s)
    return a / (a + b)


def glue_J(f: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """J[f](x) = eta(x3) f(sqrt(1 - x3^2) e1, x3) + (1 - eta(x3)) f(x).

    For axisymmetric f the two branches agree on S, so J[f] = f there.
    """

    def glued(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        x3 = x[:, 2]
        eta = cutoff_eta(x3)
        meridian = np.zeros_like(x)
        meridian[:, 0] = np.sqrt(np.clip(1.0 - x3 * x3, 0.0, None))
        meridian[:, 2] = x3
        return eta * np.asarray(f(meridian)) + (1.0 - eta) * np.asarray(f(x))

    return glued


# ----------------------------------------------------------------------
# the quadratic operators


@dataclass(eq=False)
class TResult:
    """Output of T or T~.

    ``trace`` is the degree-L projection on S, ``tail`` the largest discarded
    coefficient of degree L+1..2L, ``field`` the interior function (a
    polynomial for T, the glued callable for T~) and ``solution`` the
    linearized solve it came from.
    """

    trace: SphereExpansion
    tail: float
    field: Union[Poly, Callable]
    solution: LinearizedSolution
    grad_sq: Poly


def _grad_sq(sol: LinearizedSolution) -> Poly:
    gx, gy, gz = sol.gradient_polys()
    return gx * gx + gy * gy + gz * gz


def _grad_sq_on_grid(sol: LinearizedSolution, grid: SphereGrid) -> np.ndarray:
    g = sol.gradient(grid.nodes)
    return np.sum(g * g, axis=1)


def _split_projection(values: np.ndarray, grid: SphereGrid, L: int, **tags) -> Tuple[SphereExpansion, float]:
    full = project_sphere(SphereField(grid, values), 2 * L)
    tail = full.coeffs[L + 1:]
    kept = full.resized(L)
    return SphereExpansion(kept.coeffs, **tags), float(np.max(np.abs(tail))) if tail.size else 0.0


def operator_T(phi: SphereExpansion, check_symmetry: bool = True) -> TResult:
    """T[phi] = |grad v|^2 with v the linearized solution for (phi, psi = 0).

    With ``check_symmetry`` the input must be even in x3 (the class on which T
    maps into itself) and the output is tagged even.
    """
    if check_symmetry and not phi.even:
        odd = phi.parity_parts()[1].sup_norm()
        if odd > SYMMETRY_TOL:
            raise SymmetryError(f"T is restricted to even data; odd component {odd:.3e}")
        phi = phi.retagged(even=True, axisymmetric=phi.axisymmetric)
    L = phi.L
    sol = solve_linearized(phi, 0.0)
    grid = working_grid(L)
    vals = _grad_sq_on_grid(sol, grid)
    tags = {"even": True} if check_symmetry else {}
    trace, tail = _split_projection(vals, grid, L, **tags)
    G = _grad_sq(sol)
    return TResult(trace, tail, G, sol, G)


def operator_T_tilde(phi: SphereExpansion, h: float = 0.0, check_symmetry: bool = True) -> TResult:
    """T~_h[phi] = J[|grad v|^2] with v the linearized solution for (phi, psi = h)."""
    if check_symmetry and not phi.axisymmetric:
        nz = phi.nonzonal_norm()
        if nz > SYMMETRY_TOL:
            raise SymmetryError(f"T~ is restricted to axisymmetric data; azimuthal modes up to {nz:.3e}")
        phi = phi.retagged(axisymmetric=True, even=phi.even)
    L = phi.L
    sol = solve_linearized(phi, float(h))
    G = _grad_sq(sol)
    glued = glue_J(G)
    grid = working_grid(L)
    tags = {"axisymmetric": True} if check_symmetry else {}
    trace, tail = _split_projection(glued(grid.nodes), grid, L, **tags)
    return TResult(trace, tail, glued, sol, G)


# ----------------------------------------------------------------------
# boundary data


def _interp_table(theta, phi_az, g):
    """Linear interpolator on a structured (theta, azimuth) table, periodic in azimuth."""
    th = np.unique(theta)
    az = np.unique(np.mod(phi_az, 2.0 * np.pi))
    if th.size * az.size != len(g):
        raise ConfigError("tabulated g must sit on a full (theta, phi_az) product grid")
    if th.size < 2 or az.size < 2:
        raise ConfigError("tabulated g needs at least two distinct theta and phi_az values")
    table = np.full((th.size, az.size), np.nan)
    ti = np.searchsorted(th, theta)
    ai = np.searchsorted(az, np.mod(phi_az, 2.0 * np.pi))
    table[ti, ai] = g
    if np.any(np.isnan(table)):
        raise ConfigError("tabulated g has duplicate or missing (theta, phi_az) entries")
    az_ext = np.concatenate([[az[-1] - 2.0 * np.pi], az, [az[0] + 2.0 * np.pi]])
    tab_ext = np.concatenate([table[:, -1:], table, table[:, :1]], axis=1)
    interp = RegularGridInterpolator((th, az_ext), tab_ext, method="linear", bounds_error=False, fill_value=None)

    def func(y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        t = np.arccos(np.clip(y[:, 2] / np.linalg.norm(y, axis=1), -1.0, 1.0))
        a = np.mod(np.arctan2(y[:, 1], y[:, 0]), 2.0 * np.pi)
        return interp(np.stack([np.clip(t, th[0], th[-1]), a], axis=1))

    return func


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Gradient-modulus data ``g`` on S with its symmetry class.

    Parameters
    ----------
    kind : str
        ``constant``, ``manufactured``, ``coefficients`` or ``tabulated``.
    func : callable
        Unit vectors (n, 3) to values of g.
    symmetry : str or None
        ``even``, ``axisymmetric`` or None.
    h : float
        Equatorial level for the axisymmetric branch.
    g_squared : Poly, optional
        Exact polynomial for g^2 when known (manufactured data).
    params : dict
        JSON-ready description used in run reports.
    """

    kind: str
    func: Callable[[np.ndarray], np.ndarray]
    symmetry: Optional[str] = None
    h: float = 0.0
    g_squared: Optional[Poly] = None
    params: dict = field(default_factory=dict)

    @classmethod
    def constant(cls, value: float = 1.0, symmetry: str = "even", h: float = 0.0) -> "BoundaryData":
        value = float(value)
        return cls(
            "constant",
            lambda y: np.full(len(np.atleast_2d(y)), value),
            symmetry,
            h,
            Poly.constant(value * value),
            {"value": value},
        )

    @classmethod
    def from_potential(cls, u: Poly, symmetry: str, h: float = 0.0, params: Optional[dict] = None) -> "BoundaryData":
        """g = |grad u| on S for a given harmonic polynomial u."""
        grads = u.gradient()
        g2 = grads[0] * grads[0] + grads[1] * grads[1] + grads[2] * grads[2]
        return cls("manufactured", lambda y: np.sqrt(g2(np.atleast_2d(y))), symmetry, h, g2, dict(params or {}))

    @classmethod
    def from_coefficients(cls, exp: SphereExpansion, symmetry: Optional[str] = None, h: float = 0.0) -> "BoundaryData":
        """g = sum a_lm Y_lm."""
        items = [[l, m, float(exp.coeffs[l, exp.L + m])] for l in range(exp.L + 1) for m in range(-l, l + 1) if exp.coeffs[l, exp.L + m] != 0.0]
        return cls("coefficients", exp.evaluate, symmetry, h, None, {"L": exp.L, "coefficients": items})

    @classmethod
    def from_table(cls, theta, phi_az, g, symmetry: Optional[str] = None, h: float = 0.0, source: str = "") -> "BoundaryData":
        theta = np.asarray(theta, dtype=float)
        phi_az = np.asarray(phi_az, dtype=float)
        g = np.asarray(g, dtype=float)
        if not (theta.shape == phi_az.shape == g.shape) or theta.ndim != 1:
            raise ConfigError("theta, phi_az and g columns must have equal length")
        return cls("tabulated", _interp_table(theta, phi_az, g), symmetry, h, None, {"source": source, "rows": int(len(g))})

    @classmethod
    def from_csv(cls, path, symmetry: Optional[str] = None, h: float = 0.0) -> "BoundaryData":
        """Read rows ``theta, phi_az, g`` (header row required)."""
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        try:
            cols = {k: np.array([float(r[k]) for r in rows]) for k in ("theta", "phi_az", "g")}
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"tabulated g file {path}: expected numeric columns theta, phi_az, g ({exc})") from None
        return cls.from_table(cols["theta"], cols["phi_az"], cols["g"], symmetry, h, str(path))

    # ------------------------------------------------------------------
    def sample(self, grid: SphereGrid) -> np.ndarray:
        """Values at grid nodes after the admissibility and symmetry checks."""
        g = np.asarray(self.func(grid.nodes), dtype=float)
        if not np.all(np.isfinite(g)) or np.any(g <= 0.0):
            raise DomainError("g must be positive at every sphere node")
        if self.symmetry == "even":
            gap = float(np.max(np.abs(g - g[grid.mirror_index()])))
            if gap > 1e-12:
                raise SymmetryError(f"g is tagged even but differs at mirrored nodes by {gap:.3e}")
        elif self.symmetry in ("axisymmetric", "axisym"):
            rings = g.reshape(grid.n_theta, grid.n_phi)
            var = float(np.max(np.var(rings, axis=1)))
            if var > 1e-12:
                raise SymmetryError(f"g is tagged axisymmetric but its azimuthal variance is {var:.3e}")
        return g

    def squared_minus_one(self, L: int, grid: Optional[SphereGrid] = None, **tags) -> SphereExpansion:
        """Degree-L projection of g^2 - 1."""
        grid = grid or working_grid(L)
        g = self.sample(grid)
        return project_sphere(SphereField(grid, g * g - 1.0), L, grid, **tags)

    def describe(self) -> dict:
        return {"kind": self.kind, "symmetry": self.symmetry, "h": self.h, **self.params}


# ----------------------------------------------------------------------
# configuration and report


@dataclass(frozen=True)
class SolverConfig:
    """Fixed-point settings.

    ``tol`` is the step size in the sup-coefficient norm at which iteration
    stops; ``lam`` the target contraction factor used for the delta
    surrogates; ``delta_warn`` the |g - 1| surrogate above which a warning is
    issued (the iteration still runs).
    """

    L: int = 8
    tol: float = 1e-10
    max_iter: int = 50
    lam: float = 0.9
    alpha: float = 0.5
    n_pairs: int = 10_000
    seed: int = 42
    delta_warn: float = 0.5
    monitor: bool = True

    def __post_init__(self):
        if self.L < 1:
            raise ConfigError(f"L must be >= 1, got {self.L}")
        if not self.tol > 0.0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.lam < 1.0:
            raise ConfigError(f"lam must lie in (0, 1), got {self.lam}")


@dataclass
class FixedPointReport:
    """History and diagnostics of one fixed-point run.

    ``contraction_ratios[k] = step_norms[k + 1] / step_norms[k]`` (NaN when the
    earlier step is exactly zero).  ``psi_constants`` holds the measured
    surrogates of the quadratic-bound constants and the derived delta radii.
    """

    mode: str
    L: int
    tol: float
    lambda_target: float
    iterate_norms: List[float] = field(default_factory=list)
    step_norms: List[float] = field(default_factory=list)
    contraction_ratios: List[float] = field(default_factory=list)
    tail_norms: List[float] = field(default_factory=list)
    psi_constants: Dict[str, float] = field(default_factory=dict)
    converged: bool = False
    iterations: int = 0
    boundary_residual: float = float("nan")
    equator_residual: float = float("nan")
    warnings: List[str] = field(default_factory=list)
    phi_coefficients: Optional[List[List[float]]] = None

    @property
    def max_contraction_ratio(self) -> float:
        r = [x for x in self.contraction_ratios if np.isfinite(x)]
        return max(r) if r else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max_contraction_ratio"] = self.max_contraction_ratio
        return _json_safe(d)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# ----------------------------------------------------------------------
# iteration


def psi_step(g: BoundaryData, phi: SphereExpansion, mode: str = "odd", h: Optional[float] = None) -> SphereExpansion:
    """One application of Psi_g (mode ``odd``) or Psi~_{g,h} (mode ``axisymmetric``)."""
    tags = _mode_tags(mode)
    rhs = g.squared_minus_one(phi.L, **tags)
    return _psi_apply(rhs, phi, mode, g.h if h is None else h)[0]


def _psi_apply(rhs: SphereExpansion, phi: SphereExpansion, mode: str, h: float):
    if mode == "odd":
        T = operator_T(phi)
    else:
        T = operator_T_tilde(phi, h)
    return (rhs - T.trace) * 0.5, T


def _check_mode(phi: SphereExpansion, mode: str) -> SphereExpansion:
    tags = _mode_tags(mode)
    if mode == "odd":
        if phi.parity_parts()[1].sup_norm() > SYMMETRY_TOL:
            raise SymmetryError("the odd branch iterates even data; initial phi has an odd part")
    elif phi.nonzonal_norm() > SYMMETRY_TOL:
        raise SymmetryError("the axisymmetric branch iterates zonal data; initial phi has azimuthal modes")
    return SphereExpansion(phi.coeffs, **tags)


def fixed_point_solve(
    g: BoundaryData,
    mode: str = "odd",
    h: Optional[float] = None,
    config: SolverConfig = SolverConfig(),
    phi0: Optional[SphereExpansion] = None,
) -> Tuple[Poly, FixedPointReport]:
    """Iterate phi_{k+1} = Psi[phi_k] and return ``u = x3 + v`` with its report.

    Raises
    ------
    DomainError
        g is not positive at some node.
    ConvergenceError
        The step norm did not fall below ``config.tol`` within
        ``config.max_iter`` iterations; the report is attached.
    """
    mode = "axisymmetric" if mode == "axisym" else mode
    tags = _mode_tags(mode)
    h = float(g.h if h is None else h)
    if mode == "odd" and h != 0.0:
        raise ConfigError("the odd branch fixes v = 0 on the equator; h must be 0")
    L = config.L
    grid = working_grid(L)
    gvals = g.sample(grid)
    rhs = project_sphere(SphereField(grid, gvals * gvals - 1.0), L, grid, **tags)
    report = FixedPointReport(mode=mode, L=L, tol=config.tol, lambda_target=config.lam)

    monitor = HolderMonitor(config.alpha, config.n_pairs, config.seed) if config.monitor else None
    if monitor is not None:
        g_minus_1 = poisson_extend_spectral(project_sphere(SphereField(grid, gvals - 1.0), L, grid))
        g2_minus_1 = poisson_extend_spectral(rhs)
        n1 = monitor.norm(g_minus_1)
        n2 = monitor.norm(g2_minus_1)
        report.psi_constants["g_minus_1"] = n1
        report.psi_constants["g2_minus_1"] = n2
        report.psi_constants["C0"] = n2 / ((n1 + 2.0) * n1) if n1 > 0.0 else 0.0
        if n1 > config.delta_warn:
            msg = f"|g - 1| surrogate {n1:.3g} exceeds delta_warn = {config.delta_warn}; convergence is not expected"
            report.warnings.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)

    phi = SphereExpansion.zeros(L, **tags) if phi0 is None else _check_mode(phi0.resized(L), mode)
    prev_step = None
    prev_field = None
    prev_norm = None
    prev_phi = None
    quad, lip = [], []
    for k in range(1, config.max_iter + 1):
        new, T = _psi_apply(rhs, phi, mode, h)
        step = (new - phi).sup_norm()
        report.iterate_norms.append(new.sup_norm())
        report.step_norms.append(step)
        report.tail_norms.append(T.tail)
        if prev_step is not None:
            report.contraction_ratios.append(step / prev_step if prev_step > 0.0 else float("nan"))
        if monitor is not None:
            nphi = monitor.norm(T.solution.w)
            nT = monitor.norm(T.field)
            level = h * h if mode != "odd" else 0.0
            if nphi > 0.0 or level > 0.0:
                quad.append(nT / (nphi * nphi + level))
            if prev_field is not None:
                dphi = monitor.norm(T.solution.w - prev_phi)
                dT = monitor.norm(_difference(T.field, prev_field))
                denom = (nphi + prev_norm + (abs(h) if mode != "odd" else 0.0)) * dphi
                if denom > 0.0:
                    lip.append(dT / denom)
            prev_field, prev_norm, prev_phi = T.field, nphi, T.solution.w
        prev_step = step
        phi = new
        report.iterations = k
        if step <= config.tol:
            report.converged = True
            break

    if monitor is not None:
        _record_constants(report, mode, quad, lip, config.lam)

    sol = solve_linearized(phi, h if mode != "odd" else 0.0)
    u = X3 + sol.v
    report.phi_coefficients = phi.coeffs.tolist()
    report.boundary_residual = boundary_residual(u, gvals, grid)
    t = 2.0 * np.pi * np.arange(256) / 256
    rim = np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1)
    report.equator_residual = float(np.max(np.abs(u(rim) - h)))
    if not report.converged:
        raise ConvergenceError(
            f"no convergence in {config.max_iter} iterations (last step {report.step_norms[-1]:.3e})",
            report,
        )
    return u, report


def _difference(a, b):
    if isinstance(a, Poly) and isinstance(b, Poly):
        return a - b
    return lambda x: np.asarray(a(x)) - np.asarray(b(x))


def _record_constants(report: FixedPointReport, mode: str, quad: List[float], lip: List[float], lam: float) -> None:
    cq = max(quad) if quad else 0.0
    cl = max(lip) if lip else 0.0
    if mode == "odd":
        report.psi_constants["C1"] = cq
        report.psi_constants["C2"] = cl
        report.psi_constants["delta1"] = min(1.0 / cq if cq else np.inf, lam / cl if cl else np.inf)
    else:
        report.psi_constants["C3"] = cq
        report.psi_constants["C4"] = cl
        report.psi_constants["delta2"] = min(1.0 / (2.0 * cq) if cq else np.inf, 2.0 * lam / (3.0 * cl) if cl else np.inf)


def boundary_residual(u: Poly, gvals: np.ndarray, grid: SphereGrid) -> float:
    """max over nodes of | |grad u|^2 - g^2 |."""
    grads = np.stack([d(grid.nodes) for d in u.gradient()], axis=1)
    return float(np.max(np.abs(np.sum(grads * grads, axis=1) - gvals * gvals)))
