"""Deterministic PRNG with a language-independent seed-to-stream contract.

The synthetic-data generator must produce byte-identical fixtures on any
platform and be reproducible from the written contract alone, so the
algorithm is pinned here rather than delegated to a runtime default:

* State initialization: the 64-bit seed is expanded through four rounds of
  SplitMix64 (Steele, Lea & Flood's mixer: add 0x9E3779B97F4A7C15, then
  xor-shift-multiply with 0xBF58476D1CE4E5B9 / 0x94D049BB133111EB).
* Stream: xoshiro256** (Blackman & Vigna), scrambler rotl(s1 * 5, 7) * 9.
* `random()` takes the top 53 bits of the next output divided by 2**53.
* `randbelow(n)` rejection-samples masked outputs, so it is unbiased and
  consumes a deterministic-given-history number of outputs.
* `shuffle` is a Fisher-Yates walk from the last index down to 1.

All quantities are modulo 2**64.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1

T = TypeVar("T")


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** seeded via SplitMix64 from a single 64-bit value."""

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit value, got {seed}")
        state = seed
        s = []
        for _ in range(4):
            state, out = _splitmix64(state)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) / (1 << 53)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via masked rejection."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        mask = (1 << (n - 1).bit_length()) - 1
        while True:
            value = self.next_u64() & mask
            if value < n:
                return value

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high] inclusive."""
        if high < low:
            raise ValueError("empty range")
        return low + self.randbelow(high - low + 1)

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise ValueError("cannot choose from an empty sequence")
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, population: int, k: int) -> list[int]:
        """k distinct indices drawn from range(population), in draw order."""
        if k > population:
            raise ValueError("sample larger than population")
        pool = list(range(population))
        self.shuffle(pool)
        return pool[:k]
