import numpy as np
import pytest

from magjump.graph import WeightedGraph, random_graph


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture
def two_vertex():
    return WeightedGraph.from_edges([0, 1], {(0, 1): 1.0})


@pytest.fixture
def six_vertex():
    return random_graph(np.random.default_rng(6), 6, edge_prob=0.5)


def complex_vector(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def brute_energy(G, f, g, a=None, v=None):
    """Double loop over ordered pairs; independent of the vectorized code."""
    total = 0j
    for p in range(G.size):
        for q in range(G.size):
            phase = np.exp(1j * a[p][q]) if a is not None else 1.0
            total += G.b[p][q] * (f[p] - phase * f[q]) * np.conj(g[p] - phase * g[q])
        if v is not None:
            total += v[p] * f[p] * np.conj(g[p]) * G.mu[p]
    return total
