"""Deterministic, seedable random streams.

The generator is counter based: draw ``j`` of a stream is a pure function
of ``(seed, j)``, so any subsequence can be produced independently and the
output is bit-identical for a given seed regardless of call pattern or
platform word size.  The mixing function is the splitmix64 finalizer over
the counter, and normal variates come from the Box-Muller transform of
consecutive uniform pairs.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix_seed(*parts: int) -> int:
    """Fold integer parts into one 64-bit seed.

    Used to derive independent sub-streams, e.g. one per benchmark trial:
    ``mix_seed(master_seed, sweep_index, trial_index)``.  Distinct part
    tuples map to distinct seeds for all practical purposes.
    """
    h = 0
    for p in parts:
        p = int(p) & _MASK
        h = (h ^ ((p + _GOLDEN) & _MASK)) & _MASK
        # splitmix64 finalizer on plain Python ints
        h = (h ^ (h >> 30)) * _MIX1 & _MASK
        h = (h ^ (h >> 27)) * _MIX2 & _MASK
        h = h ^ (h >> 31)
    return h


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def raw64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """64-bit words ``offset .. offset+count-1`` of the stream."""
    if count < 0:
        raise ValueError("count must be non-negative")
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    base = np.uint64((int(seed) & _MASK))
    with np.errstate(over="ignore"):
        state = base + idx * np.uint64(_GOLDEN)
        return _mix64(state)


def uniforms(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Uniform variates in the half-open interval (0, 1].

    The open-at-zero convention keeps ``log(u)`` finite, which the
    Box-Muller transform relies on.
    """
    bits = raw64(seed, count, offset)
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53


def normals(seed: int, count: int) -> np.ndarray:
    """Standard normal variates via Box-Muller over the uniform stream.

    Draw ``k`` consumes uniforms ``2*floor(k/2)`` and ``2*floor(k/2)+1``,
    so a longer request extends a shorter one without changing its prefix.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    pairs = (count + 1) // 2
    u = uniforms(seed, 2 * pairs)
    u1 = u[0::2]
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.empty(2 * pairs, dtype=np.float64)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:count]
