"""Discrete 1-forms on a weighted graph.

Edge functions are dense ``(n, n)`` arrays indexed by ordered vertex pairs;
only entries on ordered pairs with positive weight carry meaning and every
constructor here zeroes the rest.  A 1-form is an antisymmetric edge function.
"""
from __future__ import annotations

from typing import Mapping, NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .graph import GraphError, WeightedGraph, dirichlet_energy, jump_kernel

DIRECT_SOLVE_LIMIT = 1000


def _check_edge_function(G: WeightedGraph, w) -> np.ndarray:
    w = np.asarray(w)
    if w.shape != (G.size, G.size):
        raise GraphError(f"edge function has shape {w.shape}, graph has {G.size} vertices")
    return w


def restrict(G: WeightedGraph, w) -> np.ndarray:
    """Zero an edge function outside the support of ``b``."""
    w = _check_edge_function(G, w)
    return np.where(G.edge_mask, w, 0)


def one_form(G: WeightedGraph, values: Mapping[tuple, float], dtype=float) -> np.ndarray:
    """Antisymmetric form from ``{(p, q): a(p, q)}``, one entry per unordered edge.

    Pairs that are not edges of ``G`` raise.
    """
    a = np.zeros((G.size, G.size), dtype=dtype)
    for (p, q), val in values.items():
        i, j = G.index(p), G.index(q)
        if not G.b[i, j] > 0:
            raise GraphError(f"({p}, {q}) is not an edge")
        a[i, j] = val
        a[j, i] = -val
    return a


def random_one_form(G: WeightedGraph, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Real antisymmetric form with independent normal values on the edges."""
    a = np.triu(scale * rng.standard_normal((G.size, G.size)), 1)
    return restrict(G, a - a.T)


def antisymmetrize(w) -> np.ndarray:
    """``(A w)(p, q) = (w(p, q) - w(q, p)) / 2``."""
    w = np.asarray(w)
    return 0.5 * (w - w.T)


def derive(G: WeightedGraph, f) -> np.ndarray:
    """``df(p, q) = f(p) - f(q)`` on the edges of ``G``."""
    f = np.asarray(f)
    if f.shape != (G.size,):
        raise GraphError(f"function has shape {f.shape}, graph has {G.size} vertices")
    return restrict(G, f[:, None] - f[None, :])


def inner(G: WeightedGraph, w1, w2) -> complex:
    """``<w1, w2> = sum_p sum_q w1(p, q) conj(w2(p, q)) b(p, q)``."""
    w1 = _check_edge_function(G, w1)
    w2 = _check_edge_function(G, w2)
    return complex(np.sum(w1 * np.conj(w2) * G.b))


def norm(G: WeightedGraph, w) -> float:
    return float(np.sqrt(inner(G, w, w).real))


def act(g, a) -> np.ndarray:
    """Module action on antisymmetric forms: ``(g(p) + g(q)) / 2 * a(p, q)``."""
    g = np.asarray(g)
    return 0.5 * (g[:, None] + g[None, :]) * np.asarray(a)


def divergence(G: WeightedGraph, w) -> np.ndarray:
    """``(d* w)(p) = sum_q w(p, q) n(p, q)``.

    This is the mu-adjoint of :func:`derive` on antisymmetric forms; for a
    general edge function apply :func:`antisymmetrize` first.
    """
    w = _check_edge_function(G, w)
    return np.sum(w * jump_kernel(G), axis=1)


class HodgeSplit(NamedTuple):
    u: np.ndarray
    eta: np.ndarray
    residual: float


class HodgeError(RuntimeError):
    """Raised when the gauge-fixed normal equations cannot be solved."""


def _solve_component(G: WeightedGraph, comp: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # mu-weighted normal equations (2 diag(deg) - 2 b) u = mu * d*w with the
    # zero-mean gauge added as a rank-one term; SPD on a connected component.
    b = G.b[np.ix_(comp, comp)]
    mu = G.mu[comp]
    lap = 2.0 * (np.diag(b.sum(axis=1)) - b)
    weights = mu / np.sqrt(mu.sum())
    if len(comp) <= DIRECT_SOLVE_LIMIT:
        system = lap + np.outer(weights, weights)
        return scipy.linalg.solve(system, rhs, assume_a="pos")
    lap_sp = scipy.sparse.csr_matrix(lap)
    op = scipy.sparse.linalg.LinearOperator(
        lap.shape, matvec=lambda x: lap_sp @ x + weights * (weights @ x), dtype=float
    )
    u, info = scipy.sparse.linalg.cg(op, rhs, rtol=1e-13, maxiter=10 * len(comp))
    if info != 0:
        raise HodgeError(f"conjugate gradient did not converge (info={info})")
    return u


def hodge(G: WeightedGraph, w, max_residual: float = 1e-8) -> HodgeSplit:
    """Split a real 1-form as ``w = du + eta`` with ``d* eta = 0``.

    ``u`` has zero mu-mean on every connected component and vanishes on
    isolated vertices.
    """
    w = _check_edge_function(G, w)
    if np.iscomplexobj(w):
        if np.any(w.imag != 0):
            raise GraphError("hodge expects a real form")
        w = w.real
    w = restrict(G, antisymmetrize(w))
    rhs_all = G.mu * divergence(G, w)
    u = np.zeros(G.size)
    for comp in G.components():
        if len(comp) == 1:
            continue
        u[comp] = _solve_component(G, comp, rhs_all[comp])
    du = derive(G, u)
    eta = w - du
    div = divergence(G, eta)
    scale = max(norm(G, w), 1.0)
    residual = float(np.sqrt(np.sum(G.mu * div**2)))
    if residual > max_residual * scale:
        raise HodgeError(f"Hodge solve failed, divergence residual {residual:.3e}")
    return HodgeSplit(u, eta, residual)


def energy_bound_check(G: WeightedGraph, a, f, magnetic_energy_value=None):
    """Compare ``E^a(f)`` with ``4 E(f) + 4 |f|_sup^2 |a|^2``.

    Returns ``(lhs, rhs, holds)``.  ``magnetic_energy_value`` may be supplied
    to avoid recomputing ``E^a(f)``.
    """
    if magnetic_energy_value is None:
        from .operator import magnetic_energy

        magnetic_energy_value = magnetic_energy(G, a, None, f)
    lhs = float(np.real(magnetic_energy_value))
    f = np.asarray(f)
    sup = float(np.max(np.abs(f))) if f.size else 0.0
    rhs = 4.0 * dirichlet_energy(G, f).real + 4.0 * sup**2 * norm(G, a) ** 2
    return lhs, rhs, lhs <= rhs + 1e-12 * rhs
