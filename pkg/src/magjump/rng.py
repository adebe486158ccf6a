"""Counter-based uniform draws keyed by ``(seed, stream, counter)``.

Every path owns a stream id; its k-th draw is a pure function of the key, so
an ensemble gives bit-identical paths however it is batched or split across
workers.  The mixer is the SplitMix64 finalizer applied in a chain.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_INV53 = 2.0**-53


def _mix(x: np.ndarray) -> np.ndarray:
    x = x + _GOLDEN
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


def _as_u64(x) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x))
    if arr.dtype.kind == "i":
        arr = arr.astype(np.int64).view(np.uint64)
    return arr.astype(np.uint64)


def stream_keys(seed: int, streams) -> np.ndarray:
    """Per-stream 64-bit keys derived from a master seed."""
    seed_key = _mix(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))
    return _mix(seed_key ^ _as_u64(streams))


def uniforms(keys: np.ndarray, counter) -> np.ndarray:
    """Uniform draws in the open interval (0, 1), one per key."""
    h = _mix(keys ^ _mix(_as_u64(counter)))
    return ((h >> _S11).astype(np.float64) + 0.5) * _INV53


def vertex_stream_ids(vertex_index, path_index) -> np.ndarray:
    """Stream id for path ``path_index`` started at vertex ``vertex_index``."""
    return (np.asarray(vertex_index, dtype=np.int64) << 32) | np.asarray(path_index, dtype=np.int64)
