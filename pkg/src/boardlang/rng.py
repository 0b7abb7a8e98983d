"""Counter-based deterministic RNG (splitmix64-style), vectorized.

Streams are pure functions of their integer keys, so batched and sequential
execution draw identical values for identical (seed, state, counter) keys
regardless of batch composition or thread partitioning.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64


def _mix(z):
    with np.errstate(over="ignore"):
        z = (z + _GAMMA) & np.uint64(0xFFFFFFFFFFFFFFFF)
        z = (z ^ (z >> _U64(30))) * _M1
        z = (z ^ (z >> _U64(27))) * _M2
        return z ^ (z >> _U64(31))


def hash_key(*parts):
    """Fold integer scalars/arrays into one uint64 key (broadcasting)."""
    out = _U64(0x243F6A8885A308D3)
    for p in parts:
        arr = np.asarray(p)
        if arr.dtype.kind == "i":
            arr = arr.astype(np.int64).astype(np.uint64)
        else:
            arr = arr.astype(np.uint64)
        out = _mix(out ^ arr)
    return out


def uniform(*parts):
    """float64 in [0, 1) from the hashed key parts."""
    bits = hash_key(*parts)
    return (bits >> _U64(11)).astype(np.float64) * (1.0 / (1 << 53))


def below(n, *parts):
    """Integer in [0, n) from the hashed key parts (n may be an array; n >= 1)."""
    bits = hash_key(*parts)
    n64 = np.asarray(n).astype(np.uint64)
    return (((bits >> _U64(32)) * n64) >> _U64(32)).astype(np.int64)


def spawn_seeds(seed, count):
    """Derive `count` independent per-state seeds from a master seed."""
    return hash_key(np.uint64(seed), np.arange(count, dtype=np.uint64))


def masked_choice(mask, u):
    """Pick one true column per row of a boolean (B, N) mask.

    u is a float64 (B,) uniform draw. Rows with no true entry return -1.
    """
    counts = mask.sum(axis=1)
    r = np.minimum((u * counts).astype(np.int64), np.maximum(counts - 1, 0))
    cum = np.cumsum(mask, axis=1)
    idx = np.argmax(cum > r[:, None], axis=1)
    return np.where(counts > 0, idx, -1)
