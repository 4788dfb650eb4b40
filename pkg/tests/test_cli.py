import csv
import json
import os

import numpy as np
import pytest

from backus import cli


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_solve_g_one(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["solve", "--out", str(out)]) == 0
    rows = _read_csv(out / "trace.csv")
    assert list(rows[0]) == ["theta", "phi_az", "y1", "y2", "y3", "u", "du_dxN", "grad_norm", "g"]
    grad = np.array([float(r["grad_norm"]) for r in rows])
    assert np.max(np.abs(grad - 1)) <= 1e-12
    assert all(float(r["u"]) == float(r["y3"]) for r in rows)
    sol = json.loads((out / "solution.json").read_text())
    assert sol["u_terms"] == [[0, 0, 1, 1.0]]


def test_solve_manufactured(tmp_path):
    cfg = _write(tmp_path / "c.json", {"g": {"family": "manufactured", "q": "x1x3", "eps": 0.05}})
    out = tmp_path / "out"
    assert cli.main(["solve", "--config", cfg, "--out", str(out), "--L", "8"]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["converged"] and rep["boundary_residual"] <= 1e-6


def test_solve_axisym_flag(tmp_path):
    cfg = _write(tmp_path / "c.json", {"g": {"family": "manufactured", "q": "zonal2", "eps": 0.05}})
    out = tmp_path / "out"
    assert cli.main(["solve", "--config", cfg, "--out", str(out), "--mode", "axisym"]) == 0
    sol = json.loads((out / "solution.json").read_text())
    assert sol["mode"] == "axisymmetric" and sol["h"] == pytest.approx(-0.025)


def test_solve_tabulated(tmp_path):
    th = np.linspace(0, np.pi, 33)
    az = 2 * np.pi * np.arange(64) / 64
    lines = ["theta,phi_az,g"] + [f"{t!r},{a!r},{1.0!r}" for t in th.tolist() for a in az.tolist()]
    (tmp_path / "g.csv").write_text("\n".join(lines) + "\n")
    cfg = _write(tmp_path / "c.json", {"g": {"family": "tabulated", "path": "g.csv"}})
    assert cli.main(["solve", "--config", cfg, "--out", str(tmp_path / "out")]) == 0


@pytest.mark.parametrize(
    "bad",
    [
        {"g": {"family": "nonsense"}},
        {"g": {"family": "manufactured", "q": "x1x1"}},
        {"g": {"family": "constant", "value": -1}},
        {"mode": "sideways"},
        {"tol": 0},
        {"alpha": 1.5},
        {"N": 4},
        {"unknown_key": 1},
        {"g": {"family": "coefficients", "coefficients": [[1, 3, 1.0]]}},
    ],
)
def test_config_errors_write_nothing(tmp_path, bad):
    cfg = _write(tmp_path / "c.json", bad)
    out = tmp_path / "out"
    assert cli.main(["solve", "--config", cfg, "--out", str(out)]) == cli.EXIT_CONFIG
    assert not out.exists()


def test_invalid_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    assert cli.main(["solve", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG


def test_missing_files(tmp_path):
    assert cli.main(["solve", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "o")]) == cli.EXIT_IO
    cfg = _write(tmp_path / "c.json", {"g": {"family": "tabulated", "path": "absent.csv"}})
    assert cli.main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == cli.EXIT_IO
    assert not (tmp_path / "o").exists()


def test_divergence_exit_code(tmp_path):
    cfg = _write(tmp_path / "c.json", {"g": {"family": "manufactured", "q": "x1x3", "eps": 0.05}, "max_iter": 2})
    out = tmp_path / "out"
    assert cli.main(["solve", "--config", cfg, "--out", str(out)]) == cli.EXIT_DIVERGED
    assert sorted(os.listdir(out)) == ["report.json"]
    assert json.loads((out / "report.json").read_text())["converged"] is False


def test_linearized_command(tmp_path):
    cfg = _write(tmp_path / "c.json", {"phi": {"family": "polynomial", "terms": [[0, 0, 1, 1.0]]}, "probes": 5})
    out = tmp_path / "out"
    assert cli.main(["linearized", "--config", cfg, "--out", str(out)]) == 0
    data = json.loads((out / "linearized.json").read_text())
    x = np.array(data["probes"])
    exact = x[:, 2] ** 2 / 2 + (1 - x[:, 0] ** 2 - x[:, 1] ** 2) / 4
    assert np.allclose(data["spectral_values"], exact, atol=1e-13)


def test_solve_bit_identical(tmp_path):
    cfg = _write(tmp_path / "c.json", {"g": {"family": "manufactured", "q": "x1x3", "eps": 0.05}})
    for d in ("a", "b"):
        assert cli.main(["solve", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    for name in ("solution.json", "report.json", "trace.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def _verdicts(out):
    data = json.loads((out / "verify.json").read_text())
    return data["passed"], [(c["name"], c["passed"]) for c in data["cases"]]


def test_verify_default_halved_and_reseeded(tmp_path):
    runs = {}
    for key, args in {"default": [], "halved": ["--L", "4"], "reseeded": ["--seed", "7"]}.items():
        out = tmp_path / key
        assert cli.main(["verify", "--out", str(out), *args]) == 0
        runs[key] = _verdicts(out)
    assert runs["default"][0]
    assert runs["default"] == runs["halved"] == runs["reseeded"]


def test_estimates_command(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["estimates", "--out", str(out)]) == 0
    data = json.loads((out / "estimates.json").read_text())
    assert data["non_exploding"]
    lemma = data["integral_lemma"]["1.0"]
    assert abs(lemma["values"][-1] - 0.5) <= 0.005
