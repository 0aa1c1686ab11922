"""Seeded random source for activity-duration draws.

The generator is splitmix64 (Steele, Lea & Flood; the same algorithm used to
seed the xoshiro family). It is fully specified at the 64-bit integer level,
so any implementation in any language that is handed the same seed produces
the same draw sequence. The algorithm name is pinned in the scenario schema.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4B7C15

RNG_ALGORITHM = "splitmix64"


class SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform_int(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi], both inclusive. Consumes exactly one draw."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)
