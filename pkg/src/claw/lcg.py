"""Pinned 64-bit linear congruential generator.

All experiment randomness flows through this generator so that a config
file plus a seed reproduces byte-identical results anywhere, independent of
any library RNG.  The recurrence is

    x_{k+1} = (6364136223846793005 * x_k + 1442695040888963407) mod 2^64

and uniform doubles take the top 53 bits: u = (x >> 11) / 2^53.
"""

from __future__ import annotations

__all__ = ["Lcg64"]

_MULT = 6364136223846793005
_INC = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (_MULT * self.state + _INC) & _MASK
        return self.state

    def next_float(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.next_float()

    def choice(self, items):
        idx = int(self.next_float() * len(items))
        return items[min(idx, len(items) - 1)]
