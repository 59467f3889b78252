"""Counter-based random streams.

Every stochastic routine in the package draws from a Philox generator keyed
by a 64-bit seed plus a small tuple of lane indices. Stream layout:

    stream(seed)                 one lane, e.g. a single trajectory
    stream(seed, replicate)      replicate fan-out
    stream(seed, dyad)           per-dyad draws for graph sampling

The k-th draw from a stream is the value at step k, so draws are fully
determined by (seed, lanes, step) and independent lanes can be consumed in
any order without interference.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
# Mixing constants for lane separation (splitmix64 increment and mix).
_LANE_MULT = (0x9E3779B97F4A7C15, 0xBF58476D1CE4E5B9, 0x94D049BB133111EB)


def _lane_key(lanes: tuple[int, ...]) -> int:
    h = 0x2545F4914F6CDD1D
    for i, lane in enumerate(lanes):
        h ^= (int(lane) + 1) * _LANE_MULT[i % len(_LANE_MULT)] & _MASK64
        h = (h * 0xD6E8FEB86659FD93 + i) & _MASK64
        h ^= h >> 32
    return h & _MASK64


def stream(seed: int, *lanes: int) -> np.random.Generator:
    """Return the Philox stream for (seed, lanes)."""
    if not 0 <= int(seed) <= _MASK64:
        raise ValueError("seed must fit in 64 bits")
    key = np.array([int(seed) & _MASK64, _lane_key(lanes)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniforms(seed: int, count: int, *lanes: int) -> np.ndarray:
    """Draw `count` uniforms from the (seed, lanes) stream, steps 0..count-1."""
    return stream(seed, *lanes).random(count)
