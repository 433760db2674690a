"""Splittable counter-based random keys.

A :class:`Key` names an infinite stream of 64-bit blocks; block ``i`` is
``fmix(hi ^ fmix(lo + (i + 1) * GAMMA))`` where ``fmix`` is the splitmix64
finalizer. Keys are plain values: the same key always yields the same stream.
Splitting derives children from a tweaked copy of the parent, so a parent's
own sampling stream never overlaps its children's key material.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from evoflow import kernels
from evoflow.errors import InvalidArgument

MASK64 = 0xFFFFFFFFFFFFFFFF
_SEED_TWEAK = 0x6A09E667F3BCC909
_SPLIT_TWEAK = 0xBB67AE8584CAA73B
_GAMMA = 0x9E3779B97F4A7C15


def _fmix(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True, slots=True)
class Key:
    hi: int
    lo: int

    def __post_init__(self):
        if not (0 <= self.hi <= MASK64 and 0 <= self.lo <= MASK64):
            raise InvalidArgument("key words must be unsigned 64-bit integers")

    def bits(self, n: int, start: int = 0) -> np.ndarray:
        """``n`` raw 64-bit blocks of this key's stream, beginning at counter ``start``."""
        return kernels.random_bits(self.hi, self.lo, start, n)

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1) with 53 random bits each."""
        return (self.bits(n) >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    def __repr__(self):
        return f"Key(0x{self.hi:016x}, 0x{self.lo:016x})"


def key_new(seed: int) -> Key:
    """Deterministic key from a 64-bit seed; distinct seeds give distinct keys."""
    if not 0 <= seed <= MASK64:
        raise InvalidArgument(f"seed must be an unsigned 64-bit integer, got {seed}")
    return Key(_fmix(seed ^ _SEED_TWEAK), _fmix(seed + _GAMMA))


def key_split(key: Key, n: int = 2) -> list[Key]:
    """Derive ``n`` child keys. The parent must not be used for sampling afterwards."""
    if n < 1:
        raise InvalidArgument(f"cannot split a key into {n} children")
    words = kernels.random_bits(key.hi ^ _SPLIT_TWEAK, key.lo, 0, 2 * n)
    return [Key(int(words[2 * i]), int(words[2 * i + 1])) for i in range(n)]
