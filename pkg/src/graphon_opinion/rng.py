"""Counter-based random numbers (Philox4x32-10).

Each draw is a pure function of a 128-bit counter and a 64-bit key, so a
Monte Carlo step can give every agent pair its own substream keyed by
``(pair index, step, stream)``.  Results are then independent of how pairs
are distributed over threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["philox4x32", "philox_uniforms", "seed_key", "STREAM_PAIRS", "U32_SCALE"]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)

U32_SCALE = 2.0**-32

STREAM_PAIRS = 1


@njit(cache=True, nogil=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds; all arguments and results are uint64 holding
    32-bit words."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK
        c0 = (hi1 ^ c1 ^ k0) & _MASK
        c1 = lo1
        c2 = (hi0 ^ c3 ^ k1) & _MASK
        c3 = lo0
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


@njit(cache=True)
def _uniform_block(n, c1, c2, c3, k0, k1):
    out = np.empty((n, 4))
    for i in range(n):
        r0, r1, r2, r3 = philox4x32(np.uint64(i), c1, c2, c3, k0, k1)
        out[i, 0] = (r0 + 0.5) * U32_SCALE
        out[i, 1] = (r1 + 0.5) * U32_SCALE
        out[i, 2] = (r2 + 0.5) * U32_SCALE
        out[i, 3] = (r3 + 0.5) * U32_SCALE
    return out


def seed_key(seed):
    """Split a nonnegative integer seed into the two 32-bit key words."""
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    seed &= (1 << 64) - 1
    return np.uint64(seed & 0xFFFFFFFF), np.uint64(seed >> 32)


def philox_uniforms(n, seed, step=0, stream=STREAM_PAIRS):
    """``(n, 4)`` uniforms in (0, 1); row ``i`` uses counter
    ``(i, step_lo, step_hi, stream)``."""
    k0, k1 = seed_key(seed)
    step = int(step)
    return _uniform_block(
        int(n), np.uint64(step & 0xFFFFFFFF), np.uint64(step >> 32),
        np.uint64(stream), k0, k1,
    )
