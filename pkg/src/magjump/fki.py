"""Monte Carlo Feynman-Kac-Ito semigroup and its comparison with ``e^{-tH}``.

The estimator averages ``exp(i S_t - V_t) f(Y_t)`` over paths started at a
vertex.  Standard errors come from batch means, real and imaginary parts
treated separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import rng
from .graph import WeightedGraph
from .operator import MagneticOperator, _real_form, _real_potential, semigroup_exact
from .paths import PathEnsemble, potential_integral, simulate_ensemble, simulate_stationary, stratonovich_integral


def fki_samples(ens: PathEnsemble, a, v, f) -> np.ndarray:
    """Per-path ``exp(i S_T - V_T) f(Y_T)``."""
    G = ens.graph
    a = _real_form(G, a)
    v = _real_potential(G, v)
    f = np.asarray(f, dtype=complex)
    S = stratonovich_integral(ens, a)
    V = potential_integral(ens, v)
    return np.exp(1j * S - V) * f[ens.final_states]


def batch_stderr(samples: np.ndarray) -> tuple[float, float]:
    """Batch-means standard errors ``(re, im)`` using ``~sqrt(n)`` batches."""
    n = len(samples)
    if n < 2:
        raise ValueError("need at least two samples")
    nb = max(2, math.isqrt(n))
    means = np.array([chunk.mean() for chunk in np.array_split(np.asarray(samples, dtype=complex), nb)])
    scale = 1.0 / math.sqrt(nb)
    return float(means.real.std(ddof=1) * scale), float(means.imag.std(ddof=1) * scale)


def _z(delta: complex, se_re: float, se_im: float, atol: float) -> float:
    def one(d, se):
        # deviations at rounding level score zero even when se is tiny
        if abs(d) <= atol:
            return 0.0
        return abs(d) / se if se > 0 else math.inf

    return max(one(delta.real, se_re), one(delta.imag, se_im))


def _start_ensemble(G: WeightedGraph, x: int, t: float, num_paths: int, seed: int) -> PathEnsemble:
    ids = rng.vertex_stream_ids(x, np.arange(num_paths))
    return simulate_ensemble(G, np.full(num_paths, x), t, seed, ids)


class PointEstimate(NamedTuple):
    mean: complex
    stderr: float
    stderr_re: float
    stderr_im: float


def _check_args(t, num_paths):
    if not t > 0:
        raise ValueError("t must be positive")
    if num_paths < 2:
        raise ValueError("num_paths must be at least 2")


def estimate(G: WeightedGraph, a, v, f, x, t: float, num_paths: int, seed: int) -> PointEstimate:
    """Monte Carlo ``P_t^{a,v} f(x)`` from paths started at vertex id ``x``."""
    _check_args(t, num_paths)
    ens = _start_ensemble(G, G.index(x), t, num_paths, seed)
    samples = fki_samples(ens, a, v, f)
    se_re, se_im = batch_stderr(samples)
    return PointEstimate(complex(samples.mean()), math.hypot(se_re, se_im), se_re, se_im)


@dataclass(frozen=True, eq=False)
class SemigroupEstimate:
    """Per-vertex Monte Carlo estimate of ``P_t^{a,v} f``."""

    mean: np.ndarray
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    num_paths: int
    t: float
    seed: int
    a: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    f: np.ndarray = field(repr=False)

    @property
    def stderr(self) -> np.ndarray:
        return np.hypot(self.stderr_re, self.stderr_im)


def estimate_vector(G: WeightedGraph, a, v, f, t: float, num_paths_per_vertex: int, seed: int,
                    ) -> SemigroupEstimate:
    """Estimate at every start vertex; stream ids encode ``(vertex, path)``."""
    _check_args(t, num_paths_per_vertex)
    a = _real_form(G, a)
    v = _real_potential(G, v)
    f = np.asarray(f, dtype=complex)
    m = num_paths_per_vertex
    starts = np.repeat(np.arange(G.size), m)
    ids = rng.vertex_stream_ids(starts, np.tile(np.arange(m), G.size))
    ens = simulate_ensemble(G, starts, t, seed, ids)
    samples = fki_samples(ens, a, v, f).reshape(G.size, m)
    errs = np.array([batch_stderr(row) for row in samples])
    return SemigroupEstimate(samples.mean(axis=1), errs[:, 0], errs[:, 1], m, float(t), seed, a, v, f)


def compare_exact(est: SemigroupEstimate, op: MagneticOperator, f=None) -> np.ndarray:
    """Per-vertex z-scores of the estimate against ``e^{-tH} f``.

    The score is the larger of the real and imaginary deviations, each in
    units of its own standard error.
    """
    f = est.f if f is None else np.asarray(f, dtype=complex)
    if not (np.array_equal(est.a, op.a) and np.array_equal(est.v, op.v)):
        raise ValueError("estimate and operator were built from different potentials")
    if not np.array_equal(est.f, f):
        raise ValueError("estimate was computed for a different f")
    return z_scores(est, semigroup_exact(op, est.t, f))


def z_scores(est: SemigroupEstimate, exact) -> np.ndarray:
    """Per-vertex z-scores of ``est.mean`` against reference values ``exact``."""
    atol = 1e-12 * (1.0 + float(np.max(np.abs(est.f), initial=0.0)))
    return np.array([
        _z(complex(m - e), sr, si, atol)
        for m, e, sr, si in zip(est.mean, exact, est.stderr_re, est.stderr_im)
    ])


def acceptance_fraction(z: np.ndarray, threshold: float = 4.0) -> float:
    return float(np.mean(np.asarray(z) <= threshold))


class SymmetryTest(NamedTuple):
    lhs: complex
    rhs: complex
    z: float


def symmetry_test(G: WeightedGraph, a, v, f, g, t: float, num_paths: int, seed: int) -> SymmetryTest:
    """Paired Monte Carlo test of ``<P_t f, g>_mu = <f, P_t g>_mu``.

    Both pairings are estimated on the same mu-started paths, the second
    one reading each path forwards with the roles of start and end swapped.
    """
    _check_args(t, num_paths)
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    ens = simulate_stationary(G, t, num_paths, seed)
    mass = G.mu.sum()
    ones = np.ones(G.size)
    w = fki_samples(ens, a, v, ones)
    y0, yt = ens.starts, ens.final_states
    lhs_s = mass * w * f[yt] * np.conj(g[y0])
    rhs_s = mass * f[y0] * np.conj(w * g[yt])
    diff = lhs_s - rhs_s
    se_re, se_im = batch_stderr(diff)
    atol = 1e-12 * mass * (1.0 + float(np.max(np.abs(f))) * float(np.max(np.abs(g))))
    return SymmetryTest(complex(lhs_s.mean()), complex(rhs_s.mean()),
                        _z(complex(diff.mean()), se_re, se_im, atol))


def antisymmetry_audit(paths, a) -> float:
    """``max |S_T(reversed) + S_T|`` over an ensemble (or list) of paths."""
    if not isinstance(paths, PathEnsemble):
        paths = PathEnsemble.from_paths(list(paths))
    S = stratonovich_integral(paths, a)
    S_rev = stratonovich_integral(paths.reversed(), a)
    return float(np.max(np.abs(S + S_rev), initial=0.0))
