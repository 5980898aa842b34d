"""SplitMix64, the seeded generator behind keys and synthetic traffic.

Reference constants (Steele, Lea & Flood; public domain C by S. Vigna)::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

all arithmetic modulo 2**64. Derived draws are defined here too so other
implementations can reproduce streams exactly:

* ``below(n)``: ``(next_u64() * n) >> 64`` (multiply-high, no rejection).
* ``fill(k)``: successive ``next_u64()`` outputs as little-endian 8-byte
  chunks, truncated to ``k`` bytes.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * MIX2) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return (self.next_u64() * n) >> 64

    def between(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def fill(self, k: int) -> bytes:
        words = (k + 7) // 8
        return b"".join(self.next_u64().to_bytes(8, "little") for _ in range(words))[:k]
