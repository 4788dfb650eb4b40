"""Command-line entry point: ``backus {solve, linearized, verify, estimates}``.

Configuration is a JSON file; command-line flags override its values.
Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 file I/O error, 4 fixed-point divergence.

Config schema (all keys optional unless stated)::

    {
      "N": 3,                       # only 3 is supported
      "L": 8, "mode": "odd" | "axisymmetric", "h": 0.0,
      "tol": 1e-10, "max_iter": 50, "lam": 0.9, "alpha": 0.5, "seed": 42,
      "grid": {"n_theta": 16, "n_phi": 32},        # trace table grid
      "g": {"family": "constant", "value": 1.0}
         | {"family": "manufactured", "q": "x1x3" | "zonal2" | "x3" | [[i, j, k, c], ...], "eps": 0.05}
         | {"family": "coefficients", "coefficients": [[l, m, a], ...]}
         | {"family": "tabulated", "path": "g.csv"},   # rows theta, phi_az, g
      "phi": {"family": "polynomial", "terms": [[i, j, k, c], ...]}
           | {"family": "coefficients", "coefficients": [[l, m, a], ...]},
      "psi": 0.0, "path": "spectral" | "kernel" | "both", "probes": 20
    }
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import BackusError, ConfigError, ConvergenceError
from .grids import build_sphere_grid
from .harmonic_ext import SphereExpansion
from .nonlinear import BoundaryData, SolverConfig, fixed_point_solve
from .oracle import make_manufactured
from .poly import X1, X3, Poly, rho_squared

log = logging.getLogger("backus")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO, EXIT_DIVERGED = 0, 1, 2, 3, 4

NAMED_Q = {
    "x1x3": (lambda: X1 * X3, "odd"),
    "zonal2": (lambda: X3 * X3 - rho_squared() / 2, "axisymmetric"),
    "x3": (lambda: X3, "odd"),
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    N: int = 3
    L: int = 8
    mode: str = "odd"
    h: float = 0.0
    tol: float = 1e-10
    max_iter: int = 50
    lam: float = 0.9
    alpha: float = 0.5
    seed: int = 42
    grid: Dict[str, int] = field(default_factory=lambda: {"n_theta": 16, "n_phi": 32})
    g: Dict = field(default_factory=lambda: {"family": "constant", "value": 1.0})
    phi: Optional[Dict] = None
    psi: float = 0.0
    path: str = "spectral"
    probes: int = 20
    out: str = "."
    base_dir: str = "."

    def solver_config(self) -> SolverConfig:
        return SolverConfig(L=self.L, tol=self.tol, max_iter=self.max_iter, lam=self.lam, alpha=self.alpha, seed=self.seed)


_KEYS = {"N", "L", "mode", "h", "tol", "max_iter", "lam", "alpha", "seed", "grid", "g", "phi", "psi", "path", "probes"}


def load_config(args: argparse.Namespace) -> RunConfig:
    """Merge the JSON file (if any) with command-line overrides and validate."""
    data: Dict = {}
    base = "."
    if args.config:
        try:
            with open(args.config) as fh:
                raw = fh.read()
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - _KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        base = os.path.dirname(os.path.abspath(args.config))
    for key in ("L", "mode", "tol", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if data.get("mode") == "axisym":
        data["mode"] = "axisymmetric"
    try:
        cfg = RunConfig(command=args.command, out=args.out, base_dir=base, **data)
        cfg = replace(
            cfg,
            N=int(cfg.N), L=int(cfg.L), h=float(cfg.h), tol=float(cfg.tol), max_iter=int(cfg.max_iter),
            lam=float(cfg.lam), alpha=float(cfg.alpha), seed=int(cfg.seed), psi=float(cfg.psi), probes=int(cfg.probes),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config value: {exc}") from None
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.N != 3:
        raise ConfigError(f"only N = 3 is supported, got N = {cfg.N}")
    if cfg.L < 1:
        raise ConfigError("L must be >= 1")
    if not cfg.tol > 0.0:
        raise ConfigError("tol must be positive")
    if not 0.0 < cfg.alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    if cfg.mode not in ("odd", "axisymmetric"):
        raise ConfigError(f"mode must be 'odd' or 'axisymmetric', got {cfg.mode!r}")
    if cfg.path not in ("spectral", "kernel", "both"):
        raise ConfigError(f"path must be spectral, kernel or both, got {cfg.path!r}")
    if not isinstance(cfg.grid, dict) or int(cfg.grid.get("n_theta", 0)) < 2 or int(cfg.grid.get("n_phi", 0)) < 4:
        raise ConfigError("grid needs n_theta >= 2 and n_phi >= 4")
    cfg.solver_config()


# ----------------------------------------------------------------------
# data specs


def _terms_poly(terms) -> Poly:
    try:
        return Poly.from_terms([(int(i), int(j), int(k), float(c)) for i, j, k, c in terms])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"polynomial terms must be [i, j, k, coefficient] rows ({exc})") from None


def _coeff_expansion(items, **tags) -> SphereExpansion:
    try:
        rows = [(int(l), int(m), float(a)) for l, m, a in items]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"coefficients must be [l, m, value] rows ({exc})") from None
    if not rows:
        raise ConfigError("coefficient list is empty")
    L = max(l for l, _, _ in rows)
    try:
        return SphereExpansion.from_dict(L, rows, **tags)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def resolve_boundary(cfg: RunConfig) -> BoundaryData:
    """Turn the ``g`` spec into :class:`BoundaryData` (raises ConfigError or OSError)."""
    spec = cfg.g
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("g spec must be an object with a 'family' key")
    symmetry = "even" if cfg.mode == "odd" else "axisymmetric"
    fam = spec["family"]
    if fam == "constant":
        try:
            value = float(spec.get("value", 1.0))
        except (TypeError, ValueError):
            raise ConfigError("g.value must be a number") from None
        if value <= 0.0:
            raise ConfigError("constant g must be positive")
        return BoundaryData.constant(value, symmetry, cfg.h)
    if fam == "manufactured":
        q = spec.get("q")
        if isinstance(q, str):
            if q not in NAMED_Q:
                raise ConfigError(f"unknown manufactured q {q!r}; choose from {sorted(NAMED_Q)}")
            q = NAMED_Q[q][0]()
        elif isinstance(q, list):
            q = _terms_poly(q)
        else:
            raise ConfigError("g.q must be a name or a list of [i, j, k, c] terms")
        try:
            eps = float(spec.get("eps", 0.05))
            case = make_manufactured(q, eps, cfg.mode)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"manufactured g rejected: {exc}") from None
        return replace(case.g, params={**case.g.params, "family": "manufactured"})
    if fam == "coefficients":
        exp = _coeff_expansion(spec.get("coefficients", []))
        return BoundaryData.from_coefficients(exp, symmetry, cfg.h)
    if fam == "tabulated":
        path = spec.get("path")
        if not isinstance(path, str):
            raise ConfigError("g.path must name a CSV file")
        full = path if os.path.isabs(path) else os.path.join(cfg.base_dir, path)
        return BoundaryData.from_csv(full, symmetry, cfg.h)
    raise ConfigError(f"unknown g family {fam!r}")


def resolve_phi(cfg: RunConfig):
    spec = cfg.phi or {"family": "polynomial", "terms": [[0, 0, 1, 1.0]]}
    if not isinstance(spec, dict):
        raise ConfigError("phi spec must be an object")
    fam = spec.get("family")
    if fam == "polynomial":
        p = _terms_poly(spec.get("terms", []))
        return p, max(1, p.degree)
    if fam == "coefficients":
        exp = _coeff_expansion(spec.get("coefficients", []))
        return exp.evaluate, exp.L
    raise ConfigError(f"unknown phi family {fam!r}")


# ----------------------------------------------------------------------
# writers


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write_files(out: str, files: Dict[str, str]) -> None:
    os.makedirs(out, exist_ok=True)
    for name in sorted(files):
        with open(os.path.join(out, name), "w", newline="") as fh:
            fh.write(files[name])


def _poly_terms(p: Poly) -> List[List[float]]:
    return [[i, j, k, c] for (i, j, k), c in sorted(p.terms.items())]


def trace_table(u: Poly, g: BoundaryData, n_theta: int, n_phi: int) -> str:
    """CSV text: theta, phi_az, y1, y2, y3, u, du_dxN, grad_norm, g with 17 significant digits."""
    grid = build_sphere_grid(n_theta, n_phi)
    y = grid.nodes
    theta = np.repeat(grid.theta, n_phi)
    az = np.tile(grid.azimuths, n_theta)
    grads = np.stack([d(y) for d in u.gradient()], axis=1)
    cols = [theta, az, y[:, 0], y[:, 1], y[:, 2], u(y), grads[:, 2], np.linalg.norm(grads, axis=1), g.func(y)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "phi_az", "y1", "y2", "y3", "u", "du_dxN", "grad_norm", "g"])
    for row in zip(*cols):
        w.writerow(["%.17g" % v for v in row])
    return buf.getvalue()


# ----------------------------------------------------------------------
# commands


def run_solve(cfg: RunConfig) -> int:
    g = resolve_boundary(cfg)
    h = cfg.h if cfg.mode == "axisymmetric" else 0.0
    if cfg.g.get("family") == "manufactured" and cfg.mode == "axisymmetric":
        h = g.h
    try:
        u, report = fixed_point_solve(g, cfg.mode, h, cfg.solver_config())
    except ConvergenceError as exc:
        _write_files(cfg.out, {"report.json": _json_text(exc.report.to_dict())})
        log.error("%s", exc)
        return EXIT_DIVERGED
    solution = {
        "mode": cfg.mode,
        "h": h,
        "L": cfg.L,
        "g": g.describe(),
        "u_terms": _poly_terms(u),
        "phi_coefficients": report.phi_coefficients,
    }
    files = {
        "solution.json": _json_text(_round_trip(solution)),
        "report.json": _json_text(report.to_dict()),
        "trace.csv": trace_table(u, g, int(cfg.grid["n_theta"]), int(cfg.grid["n_phi"])),
    }
    _write_files(cfg.out, files)
    log.info("converged in %d iterations", report.iterations)
    return EXIT_OK


def _round_trip(obj):
    return json.loads(json.dumps(obj, default=float))


def run_linearized(cfg: RunConfig) -> int:
    from .linearized import KernelOptions, solve_linearized

    phi, L = resolve_phi(cfg)
    out: Dict = {"psi": cfg.psi, "path": cfg.path}
    rng = np.random.default_rng(cfg.seed)
    d = rng.standard_normal((cfg.probes, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    probes = d * (0.95 * rng.random(cfg.probes) ** (1.0 / 3.0))[:, None]
    out["probes"] = probes.tolist()
    spectral = None
    if cfg.path in ("spectral", "both"):
        spectral = solve_linearized(phi, cfg.psi, "spectral", L=L)
        out["v_terms"] = _poly_terms(spectral.v)
        out["residuals"] = spectral.residuals
        out["spectral_values"] = spectral.evaluate(probes).tolist()
    if cfg.path in ("kernel", "both"):
        kern = solve_linearized(phi, cfg.psi, "kernel", options=KernelOptions())
        out["kernel_values"] = kern.evaluate(probes).tolist()
    if spectral is not None and "kernel_values" in out:
        out["max_path_difference"] = float(np.max(np.abs(np.array(out["kernel_values"]) - np.array(out["spectral_values"]))))
    _write_files(cfg.out, {"linearized.json": _json_text(_round_trip(out))})
    return EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    from .suite import verification_suite

    cases = verification_suite(L=cfg.L, seed=cfg.seed)
    summary = {
        "L": cfg.L,
        "seed": cfg.seed,
        "cases": cases,
        "passed": all(c["passed"] for c in cases),
    }
    files = {"verify.json": _json_text(_round_trip(summary))}
    # the g = 1 trace table is part of the verified artifacts
    u, _ = fixed_point_solve(BoundaryData.constant(1.0), "odd", config=SolverConfig(L=cfg.L, monitor=False))
    files["trace_g1.csv"] = trace_table(u, BoundaryData.constant(1.0), int(cfg.grid["n_theta"]), int(cfg.grid["n_phi"]))
    _write_files(cfg.out, files)
    for c in cases:
        log.info("%-36s %s", c["name"], "pass" if c["passed"] else "FAIL")
    print(f"verify: {sum(c['passed'] for c in cases)}/{len(cases)} cases passed")
    return EXIT_OK if summary["passed"] else EXIT_VERIFY


def run_estimates(cfg: RunConfig) -> int:
    from .suite import estimate_report

    rep = estimate_report(alpha=cfg.alpha, seed=cfg.seed)
    _write_files(cfg.out, {"estimates.json": _json_text(_round_trip(rep))})
    return EXIT_OK if rep["non_exploding"] else EXIT_VERIFY


COMMANDS = {"solve": run_solve, "linearized": run_linearized, "verify": run_verify, "estimates": run_estimates}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="backus", description="Interior Backus problem on the unit ball.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("solve", "fixed-point solve for given |grad u| data"),
        ("linearized", "solve the linearized oblique problem"),
        ("verify", "run the verification suite"),
        ("estimates", "run the estimate checkers"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--L", type=int, help="spectral degree")
        p.add_argument("--mode", choices=["odd", "axisym", "axisymmetric"], help="symmetry branch")
        p.add_argument("--tol", type=float, help="fixed-point step tolerance")
        p.add_argument("--seed", type=int, default=None, help="seed for sampling (default 42)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
        if cfg.command == "solve":
            resolve_boundary(cfg)  # fail before any file is written
        elif cfg.command == "linearized":
            resolve_phi(cfg)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except BackusError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
