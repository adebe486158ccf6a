import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magjump.graph import (
    GraphError,
    WeightedGraph,
    build_stable_lattice,
    cycle_graph,
    dirichlet_energy,
    energy_density,
    generator_matrix,
    jump_kernel,
    mu_inner,
    random_graph,
    validate,
)

from conftest import brute_energy, complex_vector


def test_validate_well_formed(two_vertex):
    assert validate(two_vertex) == []


def test_validate_diagonal_weight():
    G = WeightedGraph(["0", "1"], [1.0, 1.0], [[1.0, 1.0], [1.0, 0.0]])
    problems = validate(G)
    assert len(problems) == 1 and "diagonal" in problems[0] and "vertex 0" in problems[0]


def test_validate_nonpositive_measure():
    G = WeightedGraph.from_edges([0, 1], {(0, 1): 1.0}, mu=[1.0, 0.0])
    problems = validate(G)
    assert len(problems) == 1 and "measure" in problems[0] and "vertex 1" in problems[0]


def test_validate_asymmetric_and_negative():
    G = WeightedGraph(["a", "b", "c"], [1, 1, 1], [[0, 1, -1], [2, 0, 0], [-1, 0, 0]])
    problems = validate(G)
    assert any("asymmetric" in p and "(a, b)" in p for p in problems)
    assert any("negative" in p and "(a, c)" in p for p in problems)


def test_duplicate_edge_rejected():
    with pytest.raises(GraphError, match="duplicate edge"):
        WeightedGraph.from_edges([0, 1], [(0, 1, 1.0), (1, 0, 2.0)])


def test_vertex_order_is_insertion_order():
    G = WeightedGraph.from_edges(["z", "a", "m"], {("z", "m"): 3.0})
    assert G.vertices == ("z", "a", "m")
    assert G.index("m") == 2 and G.b[0, 2] == 3.0


def test_energy_constant_is_zero(two_vertex):
    assert dirichlet_energy(two_vertex, np.full(2, 3.5)) == 0


def test_energy_two_vertex(two_vertex):
    f = np.array([1.0, 0.0])
    assert dirichlet_energy(two_vertex, f) == pytest.approx(brute_energy(two_vertex, f, f)) == 2.0


def test_energy_four_cycle_indicator():
    G = cycle_graph(4)
    f = np.array([1.0, 0, 0, 0])
    assert brute_energy(G, f, f) == 4.0
    assert dirichlet_energy(G, f) == pytest.approx(4.0, abs=1e-15)


def test_energy_dimension_mismatch(two_vertex):
    with pytest.raises(GraphError):
        dirichlet_energy(two_vertex, np.ones(3))


@pytest.mark.parametrize("mu0, expected", [(1.0, 2.0), (2.0, 1.0)])
def test_jump_kernel_values(mu0, expected):
    G = WeightedGraph.from_edges([0, 1], {(0, 1): 1.0}, mu=[mu0, 1.0])
    assert jump_kernel(G)[0, 1] == expected


def test_jump_kernel_zero_weight():
    G = WeightedGraph.from_edges([0, 1], {(0, 1): 0.0})
    assert jump_kernel(G)[0, 1] == 0.0


def test_generator_two_vertex(two_vertex):
    np.testing.assert_array_equal(generator_matrix(two_vertex), [[-2, 2], [2, -2]])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 9))
def test_graph_identities(seed, n):
    rng = np.random.default_rng(seed)
    G = random_graph(rng, n)
    assert validate(G) == []
    f, g = complex_vector(rng, n), complex_vector(rng, n)
    E_fg = dirichlet_energy(G, f, g)
    scale = 1.0 + abs(E_fg) + dirichlet_energy(G, f).real + dirichlet_energy(G, g).real
    # conjugate symmetry and positivity
    assert abs(E_fg - np.conj(dirichlet_energy(G, g, f))) <= 1e-12 * scale
    assert dirichlet_energy(G, f).real >= 0
    assert abs(E_fg - brute_energy(G, f, g)) <= 1e-12 * scale
    # detailed balance of the kernel, up to the rounding of 2b/mu
    n_mat = jump_kernel(G)
    flux = n_mat * G.mu[:, None]
    np.testing.assert_allclose(flux, flux.T, rtol=1e-15, atol=0)
    np.testing.assert_allclose(flux, 2 * G.b, rtol=1e-15, atol=0)
    # generator: conservative, -<Lf,g> = E(f,g), mu-symmetric
    L = generator_matrix(G)
    assert np.max(np.abs(L @ np.ones(n))) <= 1e-12 * (1 + np.max(np.abs(L)))
    assert abs(-mu_inner(G, L @ f, g) - E_fg) <= 1e-12 * scale
    assert abs(mu_inner(G, L @ f, g) - mu_inner(G, f, L @ g)) <= 1e-12 * scale
    # energy density integrates to the energy
    gamma = energy_density(G, f)
    assert np.all(gamma >= 0)
    E_f = dirichlet_energy(G, f).real
    assert abs(np.sum(gamma * G.mu) - E_f) <= 1e-12 * E_f + 1e-15


def test_energy_density_two_vertex(two_vertex):
    gamma = energy_density(two_vertex, np.array([1.0, 0.0]))
    np.testing.assert_array_equal(gamma, [1.0, 1.0])
    assert np.sum(gamma * two_vertex.mu) == 2.0


def test_energy_density_constant(two_vertex):
    np.testing.assert_array_equal(energy_density(two_vertex, np.ones(2)), 0)


def test_stable_lattice_values():
    G = build_stable_lattice(3, 1.0, 1.0)
    assert G.b[0, 1] == 0.5
    assert G.b[0, 2] == 0.125
    assert np.all(G.mu == 1.0)


def test_stable_lattice_cutoff():
    G = build_stable_lattice(3, 1.0, 1.0, cutoff=1.5)
    assert G.b[0, 2] == 0.0 and G.b[0, 1] == 0.5


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7])
def test_stable_lattice_shape(alpha):
    h = 0.1
    G = build_stable_lattice(12, h, alpha, cutoff=0.75)
    assert validate(G) == []
    np.testing.assert_array_equal(G.b, G.b.T)
    row = G.b[0, 1:]
    inside = row[row > 0]
    assert len(inside) == 7  # distances 0.1 .. 0.7
    assert np.all(np.diff(inside) < 0)
    d = 3 * h
    assert G.b[0, 3] == pytest.approx(0.5 * d ** (-1 - alpha) * h**2, rel=1e-14)


@pytest.mark.parametrize("kwargs", [dict(spacing=0.0, alpha=1.0), dict(spacing=1.0, alpha=2.0),
                                    dict(spacing=1.0, alpha=0.0), dict(spacing=-1.0, alpha=1.0)])
def test_stable_lattice_rejects(kwargs):
    with pytest.raises(GraphError):
        build_stable_lattice(4, **kwargs)


def test_isolated_vertex_has_zero_generator_row():
    G = WeightedGraph.from_edges([0, 1, 2], {(0, 1): 1.0})
    assert validate(G) == []
    np.testing.assert_array_equal(generator_matrix(G)[2], 0)
    assert [list(c) for c in G.components()] == [[0, 1], [2]]
