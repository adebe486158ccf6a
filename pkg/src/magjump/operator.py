"""Magnetic Hamiltonian on a weighted graph and its exact heat semigroup.

The Hamiltonian acts as

    (H f)(p) = sum_q (f(p) - exp(i a(p, q)) f(q)) n(p, q) + v(p) f(p)

with ``n = 2 b / mu``.  It is self-adjoint in ``L^2(mu)``; all spectral work
goes through the symmetrized matrix ``mu^{1/2} H mu^{-1/2}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .graph import GraphError, WeightedGraph, dirichlet_energy, jump_kernel, mu_inner


def _real_form(G: WeightedGraph, a) -> np.ndarray:
    if a is None:
        return np.zeros((G.size, G.size))
    a = np.asarray(a)
    if a.shape != (G.size, G.size):
        raise GraphError(f"potential a has shape {a.shape}, graph has {G.size} vertices")
    if np.iscomplexobj(a):
        if np.any(a.imag != 0):
            raise GraphError("magnetic potential must be real")
        a = a.real
    return np.where(G.edge_mask, a.astype(float), 0.0)


def _real_potential(G: WeightedGraph, v) -> np.ndarray:
    if v is None:
        return np.zeros(G.size)
    v = np.asarray(v)
    if v.shape != (G.size,):
        raise GraphError(f"electric potential has shape {v.shape}, graph has {G.size} vertices")
    if np.iscomplexobj(v):
        if np.any(v.imag != 0):
            raise GraphError("electric potential must be real")
        v = v.real
    return v.astype(float)


def magnetic_energy(G: WeightedGraph, a, v, f, g=None) -> complex:
    """Edgewise magnetic energy ``E^{a,v}(f, g)``.

    ``sum_{p,q} b (f(p) - e^{ia} f(q)) conj(g(p) - e^{ia} g(q)) + sum_p v f conj(g) mu``.
    """
    a = _real_form(G, a)
    v = _real_potential(G, v)
    f = np.asarray(f, dtype=complex)
    g = f if g is None else np.asarray(g, dtype=complex)
    phase = np.exp(1j * a)
    df = f[:, None] - phase * f[None, :]
    dg = g[:, None] - phase * g[None, :]
    return complex(np.sum(G.b * df * np.conj(dg)) + np.sum(v * f * np.conj(g) * G.mu))


def hamiltonian_matrix(G: WeightedGraph, a=None, v=None) -> np.ndarray:
    a = _real_form(G, a)
    v = _real_potential(G, v)
    n = jump_kernel(G)
    return np.diag(n.sum(axis=1) + v) - n * np.exp(1j * a)


@dataclass(frozen=True, eq=False)
class MagneticOperator:
    """Matrix realization of ``H^{a,v}`` with a cached eigendecomposition.

    ``eigenvectors`` are mu-orthonormal columns: ``V^* diag(mu) V = I`` and
    ``H V = V diag(eigenvalues)``.
    """

    graph: WeightedGraph
    a: np.ndarray
    v: np.ndarray
    H: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = _real_form(self.graph, self.a)
        v = _real_potential(self.graph, self.v)
        H = hamiltonian_matrix(self.graph, a, v)
        for arr in (a, v, H):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "H", H)

    @property
    def v_minus_sup(self) -> float:
        """``sup_p max(-v(p), 0)``, the bound entering ``|P_t| <= e^{t sup v_-}``."""
        return float(np.max(np.maximum(-self.v, 0.0), initial=0.0))

    @cached_property
    def _eigh(self):
        sq = np.sqrt(self.graph.mu)
        K = sq[:, None] * self.H / sq[None, :]
        K = 0.5 * (K + K.conj().T)
        try:
            w, W = scipy.linalg.eigh(K)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"eigensolver failed: {exc}") from exc
        return w, W / sq[:, None]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eigh[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eigh[1]

    def semigroup_matrix(self, t: float) -> np.ndarray:
        """Matrix of ``e^{-tH}``."""
        if t < 0:
            raise ValueError("t must be nonnegative")
        w, V = self._eigh
        return (V * np.exp(-t * w)) @ (V.conj().T * self.graph.mu)

    def apply(self, f) -> np.ndarray:
        return self.H @ np.asarray(f, dtype=complex)


def assemble(G: WeightedGraph, a=None, v=None) -> MagneticOperator:
    """Build ``H^{a,v}``; ``a`` must be a real antisymmetric form, ``v`` real."""
    return MagneticOperator(G, a, v)


def hermiticity_residual(op: MagneticOperator) -> float:
    """Max of ``|H(p,q) mu(p) - conj(H(q,p)) mu(q)|``."""
    M = op.H * op.graph.mu[:, None]
    return float(np.max(np.abs(M - M.conj().T)))


def quadratic_form_check(op: MagneticOperator, f, g=None):
    """Compare ``<Hf, g>_mu`` with the edgewise energy; returns ``(lhs, rhs, gap)``."""
    f = np.asarray(f, dtype=complex)
    g = f if g is None else np.asarray(g, dtype=complex)
    lhs = mu_inner(op.graph, op.H @ f, g)
    rhs = magnetic_energy(op.graph, op.a, op.v, f, g)
    return lhs, rhs, abs(lhs - rhs)


def semigroup_exact(op: MagneticOperator, t: float, f) -> np.ndarray:
    """``e^{-tH} f`` via the cached spectral decomposition."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    f = np.asarray(f, dtype=complex)
    if t == 0:
        return f.copy()
    w, V = op._eigh
    coeffs = V.conj().T @ (op.graph.mu * f)
    return V @ (np.exp(-t * w) * coeffs)


def spectrum(op: MagneticOperator) -> np.ndarray:
    """Ascending real eigenvalues of ``H``."""
    return op.eigenvalues.copy()


def gauge_shift(op: MagneticOperator, u) -> MagneticOperator:
    """Operator for ``a + du``; unitarily equivalent via ``diag(e^{iu})``."""
    G = op.graph
    u = np.asarray(u)
    if np.iscomplexobj(u):
        raise GraphError("gauge function must be real")
    du = np.where(G.edge_mask, u[:, None] - u[None, :], 0.0)
    return assemble(G, op.a + du, op.v)


def diamagnetic_check(op: MagneticOperator, f, t: float) -> float:
    """``max_p |e^{-tH^{a,v}} f|(p) - (e^{-tH^{0,v}} |f|)(p)``; nonpositive when domination holds."""
    free = assemble(op.graph, None, op.v)
    lhs = np.abs(semigroup_exact(op, t, f))
    rhs = semigroup_exact(free, t, np.abs(f)).real
    return float(np.max(lhs - rhs))


def energy_diamag_check(G: WeightedGraph, a, f):
    """Returns ``(E(|f|), E^{a,0}(f), holds)``."""
    lhs = dirichlet_energy(G, np.abs(f)).real
    rhs = magnetic_energy(G, a, None, f).real
    return lhs, rhs, lhs <= rhs + 1e-12 * abs(rhs)


def free_transition_matrix(G: WeightedGraph, t: float) -> np.ndarray:
    """Transition matrix ``e^{tL}`` of the free chain."""
    return assemble(G).semigroup_matrix(t).real


def generator_quotient(G: WeightedGraph, a, v, f, t: float) -> np.ndarray:
    """Semigroup difference quotient approximating ``H^{a,v} f``.

    ``(1/t) sum_q (f(p) - e^{ia(p,q)} f(q)) P_t(p, q) + v(p) f(p)`` with
    ``P_t = e^{tL}``; the error is first order in ``t``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    a = _real_form(G, a)
    v = _real_potential(G, v)
    f = np.asarray(f, dtype=complex)
    P = free_transition_matrix(G, t)
    diff = f[:, None] - np.exp(1j * a) * f[None, :]
    return np.sum(diff * P, axis=1) / t + v * f
