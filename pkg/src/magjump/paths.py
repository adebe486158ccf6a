"""Continuous-time Markov chain paths and pathwise additive functionals.

The chain holds at ``p`` for an ``Exp(rate(p))`` time, ``rate(p) = sum_q n(p, q)``,
then jumps to ``q`` with probability ``n(p, q) / rate(p)``.  Vertices of rate
zero absorb.

Line integrals use the increment ``a(from, to)`` at every jump.  With the
Hamiltonian phase ``exp(i a(p, q))`` this makes the generator of
``E_x[exp(i S_t - V_t) f(Y_t)]`` equal to ``-H^{a,v}``.

A :class:`PathEnsemble` stores many paths as flat event arrays; every
functional below accepts either a single :class:`JumpPath` (returning a
scalar) or an ensemble (returning one value per path).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import rng
from .forms import divergence
from .graph import GraphError, WeightedGraph, generator_matrix, jump_kernel

# counter reserved for the start-vertex draw; jump draws use 0, 1, 2, ...
_START_COUNTER = 2**62


@dataclass(frozen=True, eq=False)
class JumpPath:
    """One trajectory on ``[0, horizon]``; vertices are stored as indices."""

    graph: WeightedGraph
    start: int
    times: np.ndarray
    targets: np.ndarray
    horizon: float
    rng_stream_id: int = -1

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "targets", np.asarray(self.targets, dtype=np.int64))

    @property
    def states(self) -> np.ndarray:
        """Start vertex followed by every jump target."""
        return np.concatenate([[self.start], self.targets]).astype(np.int64)

    @property
    def sources(self) -> np.ndarray:
        return self.states[:-1]

    @property
    def num_events(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> int:
        return int(self.targets[-1]) if len(self.targets) else int(self.start)

    def state_at(self, t: float) -> int:
        """``Y_t``; right-continuous, so a jump at exactly ``t`` counts."""
        return int(self.states[np.searchsorted(self.times, t, side="right")])

    def events(self) -> list[tuple[float, str, str]]:
        """``(time, from, to)`` rows with vertex ids, for audit dumps."""
        V = self.graph.vertices
        return [(float(s), V[p], V[q]) for s, p, q in zip(self.times, self.sources, self.targets)]

    def invalid_reasons(self) -> list[str]:
        problems = []
        if np.any(self.targets == self.sources):
            problems.append("self-jump")
        if np.any(np.diff(self.times) <= 0):
            problems.append("event times not strictly increasing")
        if len(self.times) and (self.times[0] <= 0 or self.times[-1] > self.horizon):
            problems.append("event time outside (0, horizon]")
        return problems

    def truncate(self, t: float) -> "JumpPath":
        """The path restricted to ``[0, t]``."""
        if t > self.horizon:
            raise ValueError("t beyond horizon")
        k = np.searchsorted(self.times, t, side="right")
        return JumpPath(self.graph, self.start, self.times[:k], self.targets[:k], t, self.rng_stream_id)

    def shift(self, s: float) -> "JumpPath":
        """Time-shifted remainder ``theta_s``: starts at ``Y_s`` and runs to the horizon."""
        if s > self.horizon:
            raise ValueError("s beyond horizon")
        k = np.searchsorted(self.times, s, side="right")
        return JumpPath(
            self.graph,
            self.state_at(s),
            self.times[k:] - s,
            self.targets[k:],
            self.horizon - s,
            self.rng_stream_id,
        )


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Paths sharing a graph and horizon, stored as flat event arrays.

    Events of path ``i`` occupy ``offsets[i]:offsets[i + 1]`` in time order.
    """

    graph: WeightedGraph
    starts: np.ndarray
    horizon: float
    offsets: np.ndarray
    times: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    stream_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.starts)

    @classmethod
    def from_paths(cls, paths: Sequence[JumpPath]) -> "PathEnsemble":
        if not paths:
            raise ValueError("empty path list")
        G, T = paths[0].graph, paths[0].horizon
        if any(p.horizon != T for p in paths):
            raise ValueError("paths must share a horizon")
        counts = np.array([p.num_events for p in paths], dtype=np.int64)
        cat = lambda arrs, dt: np.concatenate(arrs).astype(dt) if arrs else np.zeros(0, dt)  # noqa: E731
        return cls(
            G,
            np.array([p.start for p in paths], dtype=np.int64),
            T,
            np.concatenate([[0], np.cumsum(counts)]),
            cat([p.times for p in paths], float),
            cat([p.sources for p in paths], np.int64),
            cat([p.targets for p in paths], np.int64),
            np.array([p.rng_stream_id for p in paths], dtype=np.int64),
        )

    def path(self, i: int) -> JumpPath:
        sl = slice(self.offsets[i], self.offsets[i + 1])
        return JumpPath(self.graph, int(self.starts[i]), self.times[sl], self.targets[sl],
                        self.horizon, int(self.stream_ids[i]))

    def __iter__(self):
        return (self.path(i) for i in range(len(self)))

    @property
    def path_index(self) -> np.ndarray:
        """Owning path of every flat event."""
        return np.repeat(np.arange(len(self)), np.diff(self.offsets))

    @property
    def final_states(self) -> np.ndarray:
        counts = np.diff(self.offsets)
        out = self.starts.copy()
        has = counts > 0
        out[has] = self.targets[self.offsets[1:][has] - 1]
        return out

    def jump_sum(self, edge_values) -> np.ndarray:
        """``sum over jumps of w(from, to)`` for every path."""
        w = np.asarray(edge_values)
        vals = w[self.sources, self.targets]
        out = np.zeros(len(self), dtype=vals.dtype if vals.size else w.dtype)
        np.add.at(out, self.path_index, vals)
        return out

    def occupation(self) -> np.ndarray:
        """``(num_paths, num_vertices)`` matrix of time spent at each vertex."""
        m, n = len(self), self.graph.size
        idx = self.path_index
        prev = np.zeros_like(self.times)
        if self.times.size:
            prev[1:] = self.times[:-1]
            prev[self.offsets[:-1][np.diff(self.offsets) > 0]] = 0.0
        last = np.zeros(m)
        counts = np.diff(self.offsets)
        last[counts > 0] = self.times[self.offsets[1:][counts > 0] - 1]
        flat = np.bincount(idx * n + self.sources, weights=self.times - prev, minlength=m * n).astype(float)
        flat += np.bincount(np.arange(m) * n + self.final_states, weights=self.horizon - last,
                            minlength=m * n)
        return flat.reshape(m, n)

    def reversed(self) -> "PathEnsemble":
        """Every path reversed over its full horizon."""
        return _reverse_flat(self)


def _as_ensemble(path) -> tuple[PathEnsemble, bool]:
    if isinstance(path, PathEnsemble):
        return path, False
    if isinstance(path, JumpPath):
        return PathEnsemble.from_paths([path]), True
    raise TypeError(f"expected JumpPath or PathEnsemble, got {type(path).__name__}")


def _out(values, single):
    return values[0].item() if single else values


def _transition_cdf(G: WeightedGraph):
    n = jump_kernel(G)
    rates = n.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cdf = np.cumsum(n, axis=1) / rates[:, None]
    cdf[rates == 0] = 1.0
    cdf[:, -1] = 1.0
    return rates, cdf


def simulate_ensemble(
    G: WeightedGraph,
    starts,
    T: float,
    seed: int,
    stream_ids=None,
) -> PathEnsemble:
    """Simulate one path per entry of ``starts`` (vertex indices) on ``[0, T]``.

    Path ``i`` uses stream ``stream_ids[i]`` (default ``i``); its draws depend
    only on ``(seed, stream_id)``.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    starts = np.asarray(starts, dtype=np.int64).reshape(-1)
    m = len(starts)
    if np.any((starts < 0) | (starts >= G.size)):
        raise GraphError("start vertex out of range")
    stream_ids = np.arange(m, dtype=np.int64) if stream_ids is None else np.asarray(stream_ids, dtype=np.int64)
    keys = rng.stream_keys(seed, stream_ids)
    rates, cdf = _transition_cdf(G)

    state = starts.copy()
    clock = np.zeros(m)
    active = np.flatnonzero(rates[state] > 0)
    rec_path, rec_time, rec_src, rec_dst = [], [], [], []
    step = 0
    while active.size:
        u = rng.uniforms(keys[active], 2 * step)
        t_next = clock[active] - np.log(u) / rates[state[active]]
        alive = t_next <= T
        active, t_next = active[alive], t_next[alive]
        if not active.size:
            break
        u2 = rng.uniforms(keys[active], 2 * step + 1)
        src = state[active]
        dst = np.minimum(np.sum(cdf[src] < u2[:, None], axis=1), G.size - 1)
        rec_path.append(active)
        rec_time.append(t_next)
        rec_src.append(src)
        rec_dst.append(dst)
        state[active] = dst
        clock[active] = t_next
        active = active[rates[dst] > 0]
        step += 1

    if rec_path:
        path_idx = np.concatenate(rec_path)
        order = np.argsort(path_idx, kind="stable")
        times = np.concatenate(rec_time)[order]
        sources = np.concatenate(rec_src)[order]
        targets = np.concatenate(rec_dst)[order]
        counts = np.bincount(path_idx, minlength=m)
    else:
        times = np.zeros(0)
        sources = targets = np.zeros(0, dtype=np.int64)
        counts = np.zeros(m, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return PathEnsemble(G, starts, float(T), offsets, times, sources, targets, stream_ids)


def simulate(G: WeightedGraph, x0, T: float, seed: int, stream_id: int = 0) -> JumpPath:
    """Single path started at vertex id ``x0``."""
    start = G.index(x0)
    return simulate_ensemble(G, [start], T, seed, [stream_id]).path(0)


def sample_stationary_starts(G: WeightedGraph, seed: int, stream_ids) -> np.ndarray:
    """Start vertices drawn from ``mu / mu.sum()``, one per stream."""
    keys = rng.stream_keys(seed, stream_ids)
    u = rng.uniforms(keys, _START_COUNTER)
    cdf = np.cumsum(G.mu) / G.mu.sum()
    cdf[-1] = 1.0
    return np.minimum(np.searchsorted(cdf, u, side="left"), G.size - 1).astype(np.int64)


def simulate_stationary(G: WeightedGraph, T: float, num_paths: int, seed: int) -> PathEnsemble:
    """Paths with mu-distributed starts; multiply means by ``mu.sum()`` for ``E_mu``."""
    ids = np.arange(num_paths, dtype=np.int64)
    return simulate_ensemble(G, sample_stationary_starts(G, seed, ids), T, seed, ids)


# ---------------------------------------------------------------------------
# pathwise functionals


def stratonovich_integral(path, a, times=None):
    """Line integral ``S_T = sum over jumps of a(from, to)``.

    With ``times`` (single path only) returns ``S_t`` at each requested time.
    """
    a = np.asarray(a, dtype=float)
    if times is not None:
        if not isinstance(path, JumpPath):
            raise TypeError("times are supported for a single JumpPath")
        incr = a[path.sources, path.targets]
        csum = np.concatenate([[0.0], np.cumsum(incr)])
        return csum[np.searchsorted(path.times, np.asarray(times, dtype=float), side="right")]
    ens, single = _as_ensemble(path)
    return _out(ens.jump_sum(a), single)


def occupation_integral(path, h):
    """``int_0^T h(Y_s) ds`` computed exactly from holding times."""
    ens, single = _as_ensemble(path)
    return _out(ens.occupation() @ np.asarray(h), single)


def potential_integral(path, v):
    """``V_T = int_0^T v(Y_s) ds``."""
    return occupation_integral(path, np.asarray(v, dtype=float))


def divergence_part(path, a):
    """``Lambda_T = int_0^T (d* a)(Y_s) ds``."""
    ens, _ = _as_ensemble(path)
    return occupation_integral(path, divergence(ens.graph, np.asarray(a, dtype=float)))


def martingale_part(path, a):
    """``M_T = sum over jumps of a(from, to) - int_0^T (d* a)(Y_s) ds``."""
    ens, single = _as_ensemble(path)
    a = np.asarray(a, dtype=float)
    m = ens.jump_sum(a) - ens.occupation() @ divergence(ens.graph, a)
    return _out(m, single)


def compensated_integral(path, a, eps: float):
    """Large jumps summed, small jumps replaced by their compensator.

    ``sum_{|a| > eps} a(from, to) + int_0^T sum_{q : |a(Y_s, q)| <= eps} a(Y_s, q) n(Y_s, q) ds``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    ens, single = _as_ensemble(path)
    a = np.asarray(a, dtype=float)
    large = np.where(np.abs(a) > eps, a, 0.0)
    small = np.where(np.abs(a) <= eps, a, 0.0)
    comp = np.sum(small * jump_kernel(ens.graph), axis=1)
    return _out(ens.jump_sum(large) + ens.occupation() @ comp, single)


class Fukushima(NamedTuple):
    A: np.ndarray | float
    M: np.ndarray | float
    N: np.ndarray | float


def fukushima(path, f) -> Fukushima:
    """``f(Y_T) - f(Y_0) = M_T + N_T`` with ``N_T = int_0^T (Lf)(Y_s) ds``."""
    ens, single = _as_ensemble(path)
    f = np.asarray(f)
    A = f[ens.final_states] - f[ens.starts]
    N = ens.occupation() @ (generator_matrix(ens.graph) @ f)
    M = A - N
    return Fukushima(*(_out(x, single) for x in (A, M, N)))


def jump_consistency_check(path: JumpPath, f) -> float:
    """Largest deviation between the jumps of ``M^f`` and ``f(Y_s) - f(Y_{s-})``.

    ``M^f`` is evaluated at each event time and just before it, so the check
    exercises the decomposition rather than restating it.
    """
    f = np.asarray(f)
    if path.num_events == 0:
        return 0.0
    worst = 0.0
    for k, s in enumerate(path.times):
        before = np.nextafter(s, -np.inf)
        m_at = fukushima(path.truncate(s), f).M
        m_before = fukushima(path.truncate(before), f).M if before > 0 else 0.0
        expected = f[path.targets[k]] - f[path.sources[k]]
        worst = max(worst, abs((m_at - m_before) - expected))
    return float(worst)


def reverse(path: JumpPath, t: float | None = None) -> JumpPath:
    """Time reversal ``r_t``: the path read backwards from ``Y_{t-}``.

    A jump from ``p`` to ``q`` at time ``s`` becomes a jump from ``q`` to
    ``p`` at time ``t - s``.  A jump at exactly ``t`` would land at time 0
    and is dropped (a null event).
    """
    t = path.horizon if t is None else t
    if t > path.horizon:
        raise ValueError("t beyond horizon")
    k = np.searchsorted(path.times, t, side="left")
    times, src, dst = path.times[:k], path.sources[:k], path.targets[:k]
    start = int(dst[-1]) if k else int(path.start)
    return JumpPath(path.graph, start, (t - times)[::-1], src[::-1], t, path.rng_stream_id)


def _reverse_flat(ens: PathEnsemble) -> PathEnsemble:
    T = ens.horizon
    idx = ens.path_index
    lo, hi = ens.offsets[:-1][idx], ens.offsets[1:][idx]
    perm = lo + hi - 1 - np.arange(len(ens.times))
    times = (T - ens.times)[perm]
    keep = times > 0
    counts = np.bincount(idx[keep], minlength=len(ens))
    if not np.all(keep):
        # jumps at exactly T collapse onto time 0; drop them and restart from Y_{T-}
        starts = ens.starts.copy()
        for i in range(len(ens)):
            p = ens.path(i)
            starts[i] = reverse(p).start
    else:
        starts = ens.final_states
    return PathEnsemble(
        ens.graph,
        starts,
        T,
        np.concatenate([[0], np.cumsum(counts)]).astype(np.int64),
        times[keep],
        ens.targets[perm][keep],
        ens.sources[perm][keep],
        ens.stream_ids.copy(),
    )


# ---------------------------------------------------------------------------
# statistics


class LevyEstimate(NamedTuple):
    lhs: float
    rhs: float
    stderr: float
    z: float


def levy_system_rhs(G: WeightedGraph, phi, T: float) -> float:
    """``T sum_p mu(p) sum_q phi(p, q) n(p, q)``."""
    phi = np.asarray(phi, dtype=float)
    return float(T * np.sum(G.mu[:, None] * phi * jump_kernel(G)))


def levy_system_estimate(G: WeightedGraph, phi, T: float, num_paths: int, seed: int,
                         ensemble: PathEnsemble | None = None) -> LevyEstimate:
    """Monte Carlo ``E_mu[sum over jumps phi(Y_{s-}, Y_s)]`` against its compensator.

    ``ensemble`` may supply pre-simulated stationary paths.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0):
        raise ValueError("phi must be nonnegative")
    ens = simulate_stationary(G, T, num_paths, seed) if ensemble is None else ensemble
    mass = G.mu.sum()
    samples = mass * ens.jump_sum(phi)
    lhs = float(samples.mean())
    se = float(samples.std(ddof=1) / np.sqrt(len(samples)))
    rhs = levy_system_rhs(G, phi, ens.horizon)
    z = 0.0 if se == 0 and lhs == rhs else (lhs - rhs) / se if se > 0 else np.inf
    return LevyEstimate(lhs, rhs, se, float(z))


class EnergyEstimate(NamedTuple):
    estimate: float
    exact: float
    stderr: float
    z: float


def _energy_estimate(samples: np.ndarray, T: float, mass: float, exact: float) -> EnergyEstimate:
    vals = mass * samples**2 / (2 * T)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(len(vals)))
    z = (est - exact) / se if se > 0 else (0.0 if est == exact else np.inf)
    return EnergyEstimate(est, exact, se, float(z))


def martingale_energy(G: WeightedGraph, a, T: float, num_paths: int, seed: int,
                      ensemble: PathEnsemble | None = None) -> EnergyEstimate:
    """``(1/2T) E_mu[M_T^2]`` for the martingale part of the line integral of ``a``; exact value ``|a|^2``."""
    from .forms import norm

    ens = simulate_stationary(G, T, num_paths, seed) if ensemble is None else ensemble
    return _energy_estimate(martingale_part(ens, a), ens.horizon, G.mu.sum(), norm(G, a) ** 2)


def fukushima_energy(G: WeightedGraph, f, T: float, num_paths: int, seed: int,
                     ensemble: PathEnsemble | None = None) -> EnergyEstimate:
    """``(1/2T) E_mu[(M^f_T)^2]``; exact value ``E(f)``."""
    from .graph import dirichlet_energy

    ens = simulate_stationary(G, T, num_paths, seed) if ensemble is None else ensemble
    exact = dirichlet_energy(G, f).real
    return _energy_estimate(np.asarray(fukushima(ens, f).M, dtype=float), ens.horizon, G.mu.sum(), exact)
