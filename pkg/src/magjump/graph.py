"""Finite weighted graphs, their Dirichlet energy, jump kernel and generator.

Conventions used throughout the package:

* ``b`` is a dense symmetric ``(n, n)`` weight matrix with zero diagonal.
* ``mu`` is the positive vertex measure.
* The energy carries no factor 1/2, so the jump kernel is ``n = 2 b / mu``
  and ``-<Lf, g>_mu`` equals the energy exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graph input or mismatched function shapes."""


@dataclass(frozen=True)
class WeightedGraph:
    """Vertex ids, vertex measure ``mu`` and symmetric edge weights ``b``.

    Construction only checks shapes; use :func:`validate` to audit the
    remaining invariants.
    """

    vertices: tuple[str, ...]
    mu: np.ndarray
    b: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vertices = tuple(str(v) for v in self.vertices)
        mu = np.asarray(self.mu, dtype=float).copy()
        b = np.asarray(self.b, dtype=float).copy()
        n = len(vertices)
        if mu.shape != (n,):
            raise GraphError(f"mu has shape {mu.shape}, expected ({n},)")
        if b.shape != (n, n):
            raise GraphError(f"b has shape {b.shape}, expected ({n}, {n})")
        if len(set(vertices)) != n:
            raise GraphError("duplicate vertex ids")
        mu.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(vertices)})

    @classmethod
    def from_edges(
        cls,
        vertices: Sequence,
        edges: Mapping[tuple, float] | Iterable[tuple],
        mu: Mapping | Sequence[float] | float = 1.0,
    ) -> "WeightedGraph":
        """Build a graph from ``{(p, q): b}`` (or ``(p, q, b)`` triples).

        Each unordered pair is stored once; giving both orientations of the
        same pair raises.
        """
        vertices = tuple(str(v) for v in vertices)
        index = {v: i for i, v in enumerate(vertices)}
        n = len(vertices)
        b = np.zeros((n, n))
        items = edges.items() if isinstance(edges, Mapping) else ((e[:2], e[2]) for e in edges)
        seen = set()
        for (p, q), w in items:
            i, j = index[str(p)], index[str(q)]
            key = frozenset((i, j))
            if key in seen:
                raise GraphError(f"duplicate edge {{{p}, {q}}}")
            seen.add(key)
            b[i, j] = w
            b[j, i] = w
        if isinstance(mu, Mapping):
            mu = {str(k): x for k, x in mu.items()}
            mu_arr = np.array([mu[v] for v in vertices], dtype=float)
        else:
            mu_arr = np.broadcast_to(np.asarray(mu, dtype=float), (n,))
        return cls(vertices, mu_arr, b)

    @property
    def size(self) -> int:
        return len(self.vertices)

    def index(self, vertex) -> int:
        try:
            return self._index[str(vertex)]
        except KeyError:
            raise GraphError(f"unknown vertex {vertex!r}") from None

    def neighbors(self, vertex) -> list[str]:
        i = self.index(vertex)
        return [self.vertices[j] for j in np.flatnonzero(self.b[i] > 0)]

    @property
    def edge_mask(self) -> np.ndarray:
        """Boolean ``(n, n)`` mask of ordered pairs with positive weight."""
        return self.b > 0

    def edges(self) -> list[tuple[int, int]]:
        """Unordered edges as index pairs ``(i, j)`` with ``i < j``."""
        i, j = np.nonzero(np.triu(self.b, 1) > 0)
        return list(zip(i.tolist(), j.tolist()))

    def components(self) -> list[np.ndarray]:
        """Connected components as sorted index arrays."""
        from scipy.sparse.csgraph import connected_components

        ncomp, labels = connected_components(self.edge_mask, directed=False)
        return [np.flatnonzero(labels == c) for c in range(ncomp)]


def validate(G: WeightedGraph) -> list[str]:
    """Return a list of invariant violations; empty when ``G`` is well formed."""
    problems = []
    if G.size < 1:
        problems.append("graph has no vertices")
    for i, v in enumerate(G.vertices):
        if not np.isfinite(G.mu[i]) or G.mu[i] <= 0:
            problems.append(f"nonpositive measure at vertex {v}: mu={G.mu[i]!r}")
        if G.b[i, i] != 0:
            problems.append(f"diagonal weight at vertex {v}: b={G.b[i, i]!r}")
    for i in range(G.size):
        for j in range(i + 1, G.size):
            p, q = G.vertices[i], G.vertices[j]
            w, w_rev = G.b[i, j], G.b[j, i]
            if not (np.isfinite(w) and np.isfinite(w_rev)):
                problems.append(f"non-finite weight on pair ({p}, {q})")
            elif w != w_rev:
                problems.append(f"asymmetric weight on pair ({p}, {q}): {w!r} != {w_rev!r}")
            elif w < 0:
                problems.append(f"negative weight on pair ({p}, {q}): {w!r}")
    return problems


def _check_function(G: WeightedGraph, f) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (G.size,):
        raise GraphError(f"function has shape {f.shape}, graph has {G.size} vertices")
    return f


def dirichlet_energy(G: WeightedGraph, f, g=None) -> complex:
    """``sum_p sum_q b(p,q) (f(p)-f(q)) conj(g(p)-g(q))`` over ordered pairs."""
    f = _check_function(G, f)
    g = f if g is None else _check_function(G, g)
    df = f[:, None] - f[None, :]
    dg = g[:, None] - g[None, :]
    return complex(np.sum(G.b * df * np.conj(dg)))


def jump_kernel(G: WeightedGraph) -> np.ndarray:
    """Jump rates ``n(p, q) = 2 b(p, q) / mu(p)``."""
    return 2.0 * G.b / G.mu[:, None]


def jump_rates(G: WeightedGraph) -> np.ndarray:
    """Total jump rate out of each vertex."""
    return jump_kernel(G).sum(axis=1)


def generator_matrix(G: WeightedGraph) -> np.ndarray:
    """Generator ``L`` with ``(Lf)(p) = sum_q (f(q) - f(p)) n(p, q)``."""
    n = jump_kernel(G)
    return n - np.diag(n.sum(axis=1))


def mu_inner(G: WeightedGraph, f, g) -> complex:
    """``<f, g>_mu = sum_p f(p) conj(g(p)) mu(p)``."""
    return complex(np.sum(np.asarray(f) * np.conj(g) * G.mu))


def energy_density(G: WeightedGraph, f) -> np.ndarray:
    """Energy density ``Gamma(f)(p) = 1/2 sum_q n(p, q) |f(p) - f(q)|^2``.

    Integrated against ``mu`` it returns the Dirichlet energy of ``f``.
    """
    f = _check_function(G, f)
    diff2 = np.abs(f[:, None] - f[None, :]) ** 2
    return 0.5 * np.sum(jump_kernel(G) * diff2, axis=1)


def build_stable_lattice(
    num_points: int,
    spacing: float,
    alpha: float,
    cutoff: float = np.inf,
) -> WeightedGraph:
    """Truncated 1-D discretization of the alpha-stable jump kernel.

    Points sit at ``x_p = p * spacing`` with measure ``spacing``; the weight
    between two points at distance ``d <= cutoff`` is
    ``0.5 * d**(-1 - alpha) * spacing**2``.
    """
    if num_points < 2:
        raise GraphError("num_points must be at least 2")
    if not spacing > 0:
        raise GraphError("spacing must be positive")
    if not 0 < alpha < 2:
        raise GraphError("alpha must lie in (0, 2)")
    if not cutoff > 0:
        raise GraphError("cutoff must be positive")
    x = spacing * np.arange(num_points)
    d = np.abs(x[:, None] - x[None, :])
    b = np.zeros_like(d)
    keep = (d > 0) & (d <= cutoff)
    b[keep] = 0.5 * d[keep] ** (-1.0 - alpha) * spacing**2
    vertices = [str(p) for p in range(num_points)]
    return WeightedGraph(vertices, np.full(num_points, float(spacing)), b)


def cycle_graph(num_vertices: int, weight: float = 1.0, mu: float = 1.0) -> WeightedGraph:
    """Cycle ``0 - 1 - ... - (N-1) - 0`` with uniform weights."""
    edges = {(p, (p + 1) % num_vertices): weight for p in range(num_vertices)}
    return WeightedGraph.from_edges(range(num_vertices), edges, mu)


def random_graph(
    rng: np.random.Generator,
    num_vertices: int,
    edge_prob: float = 0.6,
    weight_range: tuple[float, float] = (0.0, 2.0),
    mu_range: tuple[float, float] = (0.5, 2.0),
    connected: bool = True,
) -> WeightedGraph:
    """Random weighted graph; with ``connected`` a spanning path is always kept."""
    n = num_vertices
    lo, hi = weight_range
    b = np.zeros((n, n))
    mask = np.triu(rng.random((n, n)) < edge_prob, 1)
    if connected:
        perm = rng.permutation(n)
        for p, q in zip(perm[:-1], perm[1:]):
            mask[min(p, q), max(p, q)] = True
    # weights in (lo, hi]
    w = hi - (hi - lo) * rng.random((n, n))
    b[mask] = w[mask]
    b = b + b.T
    mu = rng.uniform(*mu_range, size=n)
    return WeightedGraph([str(p) for p in range(n)], mu, b)
