import numpy as np
import pytest
from numpy.testing import assert_allclose

from backus._parallel import map_chunks, worker_count
from backus.errors import ConfigError
from backus.norms import HolderMonitor, ball_samples
from backus.poly import X1, X3


def test_ball_samples_in_closed_ball():
    pts = ball_samples()
    assert np.all(np.linalg.norm(pts, axis=1) <= 1 + 1e-14)
    assert np.any(np.all(pts == 0, axis=1))


def test_poly_and_callable_agree():
    mon = HolderMonitor(n_pairs=3000)
    p = X1 * X3 + X3
    a = mon.norm(p)
    b = mon.norm(lambda x: x[:, 0] * x[:, 2] + x[:, 2])
    assert_allclose(a, b, rtol=1e-4)


def test_linear_function_norm():
    mon = HolderMonitor()
    # |grad x3| = 1 and the gradient is constant, so the quotient vanishes
    assert_allclose(mon.norm(X3), np.max(np.abs(mon.points[:, 2])) + 1.0, atol=1e-12)


def test_seeded_and_reproducible():
    a = HolderMonitor(seed=7).seminorm(X1 * X1)
    b = HolderMonitor(seed=7).seminorm(X1 * X1)
    assert a == b


def test_alpha_validated():
    with pytest.raises(ValueError):
        HolderMonitor(alpha=1.5)


def test_map_chunks_independent_of_threads(monkeypatch):
    pts = np.random.default_rng(0).random((1000, 3))
    f = lambda b: np.sin(b).sum(axis=1)
    monkeypatch.setenv("BACKUS_THREADS", "1")
    one = map_chunks(f, pts, 64)
    monkeypatch.setenv("BACKUS_THREADS", "4")
    four = map_chunks(f, pts, 64)
    assert np.array_equal(one, four)


@pytest.mark.parametrize("bad", ["0", "-2", "many"])
def test_worker_count_validated(monkeypatch, bad):
    monkeypatch.setenv("BACKUS_THREADS", bad)
    with pytest.raises(ConfigError):
        worker_count()
