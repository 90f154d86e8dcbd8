"""Shared test helpers: independent oracles used to freeze expected values."""

import numpy as np
import pytest

import commfit as cf


def finite_diff_grad(f, x, eps=1e-6):
    """Central-difference gradient oracle for a scalar function of a vector."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += eps
        xm[i] -= eps
        g[i] = (f(xp) - f(xm)) / (2.0 * eps)
    return g


def random_graph(rng, n, p):
    """Erdos-Renyi draw as a Graph."""
    iu, ju = np.triu_indices(n, k=1)
    linked = rng.random(iu.size) < p
    return cf.Graph(n=n, edges=frozenset(zip(iu[linked].tolist(), ju[linked].tolist())))


def bounded_degree_graph(rng, n, c_max, p_range=(0.08, 0.22)):
    """Random graph with maximum degree in [1, c_max], by rejection."""
    while True:
        g = random_graph(rng, n, rng.uniform(*p_range))
        c = cf.max_degree(g)
        if 1 <= c <= c_max:
            return g, c


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
