import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def unit_vectors(rng, n):
    d = rng.standard_normal((n, 3))
    return d / np.linalg.norm(d, axis=1)[:, None]


def ball_points(rng, n, r_max=0.95):
    return unit_vectors(rng, n) * (r_max * rng.random(n) ** (1.0 / 3.0))[:, None]
