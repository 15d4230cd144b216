"""Deterministic splitmix64 random number generation.

All randomness in the package flows through this module so that any
(n, bounds, seed) triple maps to the same bits on every platform and in
any reimplementation. The splitmix64 state advance is a fixed increment,
so draw i of a stream equals ``mix64(seed + (i + 1) * GOLDEN)`` and bulk
generation vectorizes over draw indices.
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15

_U_GOLDEN = np.uint64(GOLDEN)
_U_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U_M2 = np.uint64(0x94D049BB133111EB)


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_stream(seed: int, stream_id: int) -> int:
    """Child seed for an independent substream (e.g. one per dimension)."""
    return mix64((seed ^ mix64((stream_id + 1) * GOLDEN & MASK64)) & MASK64)


def bulk_u64(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Draws offset..offset+n-1 of the stream, as a uint64 array."""
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    z = np.uint64(seed & MASK64) + idx * _U_GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _U_M1
    z = (z ^ (z >> np.uint64(27))) * _U_M2
    return z ^ (z >> np.uint64(31))


def bulk_floats(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Draws mapped to float64 in [0, 1) with 53-bit resolution."""
    return (bulk_u64(seed, n, offset) >> np.uint64(11)) * 2.0**-53


class SplitMix64:
    """Scalar sequential view of the same stream ``bulk_u64`` exposes."""

    def __init__(self, seed: int, offset: int = 0):
        self._seed = seed & MASK64
        self._i = offset

    def next_u64(self) -> int:
        self._i += 1
        return mix64((self._seed + self._i * GOLDEN) & MASK64)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, bound: int) -> int:
        # modulo draw; bias is O(bound / 2**64), irrelevant for our bounds
        return self.next_u64() % bound

    def shuffle(self, values: np.ndarray) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(values) - 1, 0, -1):
            j = self.next_below(i + 1)
            values[i], values[j] = values[j], values[i]

    def permutation(self, n: int) -> np.ndarray:
        perm = np.arange(n)
        self.shuffle(perm)
        return perm
