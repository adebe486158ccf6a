import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magjump.forms import (
    act,
    antisymmetrize,
    derive,
    divergence,
    energy_bound_check,
    hodge,
    inner,
    norm,
    one_form,
    random_one_form,
    restrict,
)
from magjump.graph import WeightedGraph, cycle_graph, dirichlet_energy, generator_matrix, mu_inner, random_graph

from conftest import complex_vector


def _random_edge_function(G, rng):
    return restrict(G, rng.standard_normal((G.size, G.size)) + 1j * rng.standard_normal((G.size, G.size)))


def test_antisymmetrize_symmetric_is_zero(two_vertex):
    w = np.array([[0, 2.0], [2.0, 0]])
    np.testing.assert_array_equal(antisymmetrize(w), 0)


def test_antisymmetrize_fixed_point(two_vertex):
    w = one_form(two_vertex, {(0, 1): 0.7})
    np.testing.assert_array_equal(antisymmetrize(w), w)


def test_antisymmetrize_value():
    w = np.array([[0, 3.0], [1.0, 0]])
    assert antisymmetrize(w)[0, 1] == 1.0


def test_antisymmetrizer_is_orthogonal_projection(rng):
    G = random_graph(rng, 7)
    w = _random_edge_function(G, rng)
    A = antisymmetrize(w)
    np.testing.assert_array_equal(antisymmetrize(A), A)
    assert abs(inner(G, A, w - A)) <= 1e-12 * (1 + norm(G, w) ** 2)


def test_derive_constant(two_vertex):
    np.testing.assert_array_equal(derive(two_vertex, np.full(2, 4.0)), 0)


def test_derive_two_vertex(two_vertex):
    df = derive(two_vertex, np.array([1.0, 0.0]))
    assert df[0, 1] == 1.0 and df[1, 0] == -1.0


def test_leibniz(rng):
    G = random_graph(rng, 6)
    f, g = complex_vector(rng, 6), complex_vector(rng, 6)
    lhs = derive(G, f * g)
    rhs = restrict(G, f[:, None] * derive(G, g) + derive(G, f) * g[None, :])
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-14)


def test_inner_zero_and_norm(two_vertex, rng):
    w = one_form(two_vertex, {(0, 1): 1.0})
    assert inner(two_vertex, np.zeros((2, 2)), w) == 0
    assert inner(two_vertex, w, w) == 2.0


def test_act_identity_and_zero(rng):
    G = random_graph(rng, 5)
    a = random_one_form(G, rng)
    np.testing.assert_array_equal(act(np.ones(5), a), a)
    np.testing.assert_array_equal(act(np.zeros(5), a), 0)


def test_divergence_two_vertex(two_vertex):
    w = one_form(two_vertex, {(0, 1): 0.3})
    np.testing.assert_allclose(divergence(two_vertex, w), [0.6, -0.6], rtol=1e-15)
    np.testing.assert_array_equal(divergence(two_vertex, np.zeros((2, 2))), 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 9))
def test_form_identities(seed, n):
    rng = np.random.default_rng(seed)
    G = random_graph(rng, n)
    f, g = complex_vector(rng, n), complex_vector(rng, n)
    a = random_one_form(G, rng)
    scale = 1.0 + norm(G, a) ** 2 + dirichlet_energy(G, f).real + np.sum(G.mu * np.abs(f) ** 2)
    # <df, dg> = E(f, g)
    assert abs(inner(G, derive(G, f), derive(G, g)) - dirichlet_energy(G, f, g)) <= 1e-12 * (
        1 + dirichlet_energy(G, f).real + dirichlet_energy(G, g).real)
    # integration by parts
    assert abs(inner(G, derive(G, f), a) - mu_inner(G, f, divergence(G, a))) <= 1e-12 * scale
    # d* d = -L entrywise
    L = generator_matrix(G)
    dstar_d = np.column_stack([divergence(G, derive(G, e)) for e in np.eye(n)])
    assert np.max(np.abs(dstar_d + L)) <= 1e-12 * (1 + np.max(np.abs(L)))
    # action bound and antisymmetry
    h = complex_vector(rng, n)
    acted = act(h, a)
    np.testing.assert_array_equal(acted, -acted.T)
    assert norm(G, acted) <= np.max(np.abs(h)) * norm(G, a) * (1 + 1e-12)


def test_hodge_exact_form(rng):
    G = random_graph(rng, 7)
    f = rng.standard_normal(7)
    split = hodge(G, derive(G, f))
    expected = f - np.sum(f * G.mu) / G.mu.sum()
    np.testing.assert_allclose(split.u, expected, atol=1e-10)
    assert norm(G, split.eta) <= 1e-10


def test_hodge_cycle_flow():
    G = cycle_graph(3)
    w = one_form(G, {(0, 1): 1.0, (1, 2): 1.0, (2, 0): 1.0})
    np.testing.assert_array_equal(divergence(G, w), 0)
    split = hodge(G, w)
    assert np.max(np.abs(split.u)) <= 1e-12
    np.testing.assert_allclose(split.eta, w, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 10))
def test_hodge_random(seed, n):
    rng = np.random.default_rng(seed)
    G = random_graph(rng, n, connected=bool(rng.integers(2)), edge_prob=0.4)
    w = random_one_form(G, rng)
    u, eta, _ = hodge(G, w)
    du = derive(G, u)
    assert norm(G, w - du - eta) <= 1e-10
    assert abs(inner(G, du, eta)) <= 1e-10
    assert np.max(np.abs(divergence(G, eta))) <= 1e-8
    for comp in G.components():
        assert abs(np.sum(u[comp] * G.mu[comp])) <= 1e-10


def test_hodge_isolated_vertex():
    G = WeightedGraph.from_edges([0, 1, 2, 3], {(0, 1): 1.0, (1, 2): 0.5, (0, 2): 2.0})
    w = one_form(G, {(0, 1): 1.0, (1, 2): -0.3, (0, 2): 0.4})
    split = hodge(G, w)
    assert split.u[3] == 0.0


def test_energy_bound_trivial_cases(rng):
    G = random_graph(rng, 6)
    f = complex_vector(rng, 6)
    lhs, rhs, holds = energy_bound_check(G, np.zeros((6, 6)), f)
    assert holds and lhs == pytest.approx(dirichlet_energy(G, f).real, rel=1e-12)
    lhs, rhs, holds = energy_bound_check(G, random_one_form(G, rng), np.zeros(6))
    assert holds and lhs == 0 and rhs == 0


def test_energy_bound_randomized(rng):
    for _ in range(100):
        G = random_graph(rng, 6)
        a = random_one_form(G, rng, scale=3.0)
        f = complex_vector(rng, 6)
        assert energy_bound_check(G, a, f)[2]
