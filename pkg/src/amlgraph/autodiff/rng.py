"""Deterministic random number generation.

The generator is splitmix64 run in counter mode: draw i of a stream seeded
with s is mix64(s + (i+1)*GOLDEN), where mix64 is the splitmix64 finalizer.
Counter mode makes vectorized draws trivial and keeps the stream identical
on every platform: all arithmetic is uint64 with wraparound, no floating
point is involved until the final scaling.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_SPLIT_SALT = 0x3C79AC492BA7B653


def _mix64(x: int) -> int:
    """splitmix64 finalizer on a Python int (kept in uint64 range)."""
    z = x & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


class RngState:
    """A named, reproducible random stream.

    Identical seed => identical stream, independent of platform and of how
    draws are batched (drawing 10 values twice equals drawing 20 once).
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        self._counter = 0

    def _raw(self, n: int) -> np.ndarray:
        """Next n uint64 outputs of the stream."""
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        z = np.uint64(self.seed) + idx * np.uint64(_GOLDEN)
        z ^= z >> np.uint64(30)
        z *= np.uint64(_MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
        return z

    def uniform(self, n: int) -> np.ndarray:
        """n doubles uniform on [0, 1), using the top 53 bits per draw."""
        return (self._raw(n) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)

    def normal(self, n: int) -> np.ndarray:
        """n standard-normal doubles via Box-Muller on consecutive pairs."""
        m = (n + 1) // 2
        # u1 shifted into (0, 1] so log never sees zero
        u1 = ((self._raw(m) >> np.uint64(11)).astype(np.float64) + 1.0) * (2.0 ** -53)
        u2 = (self._raw(m) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * np.pi) * u2
        out = np.empty(2 * m)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def split(self, key: int) -> "RngState":
        """Derive an independent child stream.

        Children with distinct keys (and the parent itself) do not share
        draws; child seeds do not depend on how many values the parent has
        already produced.
        """
        return RngState(_mix64(self.seed ^ _mix64((key + 1) * _GOLDEN ^ _SPLIT_SALT)))

    def __repr__(self) -> str:
        return f"RngState(seed={self.seed}, drawn={self._counter})"
