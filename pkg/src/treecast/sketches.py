"""Hashing and fingerprint primitives used by the cut-probing protocols.

Three families live here:

* OddHash -- h(x) = 1 iff (a*x mod 2^w) <= t with a uniform odd multiplier
  and a uniform threshold.  For any set S of at most 2^w values, the parity
  of {x in S : h(x) = 1} is odd with probability at least 1/8 over the draw
  of (a, t).
* PairwiseHash -- ((a*x + b) mod p) mod r, the standard pairwise-independent
  family into a power-of-two range, plus the prefix parity vector built
  from it (bit i = parity of inputs hashing below 2^(i+1)).
* Polynomial fingerprints over Z_p -- eval of prod(alpha - x_i) mod p, used
  to compare multisets of edge numbers with no false "different" verdicts
  and at most deg(P) bad alphas per unequal pair.

`choose_prime` picks the fingerprint modulus: either the fixed Mersenne
prime 2^61 - 1 (default mode) or the smallest prime clearing the
collision-budget bound.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

M61 = (1 << 61) - 1  # 2305843009213693951
SUPPORTED_HASH_WORDS = (8, 16, 32, 61)


class SketchError(Exception):
    pass


class ConfigError(SketchError):
    pass


class CapacityError(SketchError):
    """No qualifying modulus fits the message word."""


def _mr_witness(a: int, d: int, s: int, n: int) -> bool:
    x = pow(a, d, n)
    if x in (1, n - 1):
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    return not any(_mr_witness(a, d, s, n)
                   for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37))


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    k = n + 1
    if k <= 2:
        return 2
    if k % 2 == 0:
        k += 1
    while not is_prime(k):
        k += 2
    return k


def choose_prime(max_edge_num: int, b: int, epsilon_inv: int,
                 w_msg: int = 64, fixed: bool = False) -> int:
    """Fingerprint modulus exceeding both the universe and b/epsilon.

    In fixed mode the modulus is always 2^61-1; a capacity error is raised if
    that does not fit in w_msg bits or does not clear the bounds.
    """
    floor = max(max_edge_num, b * epsilon_inv)
    if fixed:
        if M61.bit_length() > w_msg:
            raise CapacityError(f"fixed modulus needs 61 bits, word is {w_msg}")
        if M61 <= floor:
            raise CapacityError("fixed modulus below required bound")
        return M61
    p = next_prime(floor)
    if p.bit_length() > w_msg:
        raise CapacityError(f"no qualifying prime below 2^{w_msg}")
    return p


@dataclass(frozen=True)
class OddHash:
    """h(x) = [ (a*x mod 2^w) <= t ] with a odd.  Domain: 1 <= x <= 2^w."""
    a: int
    t: int
    w: int

    @classmethod
    def draw(cls, rng: random.Random, w: int) -> "OddHash":
        if w not in SUPPORTED_HASH_WORDS:
            raise ConfigError(f"hash word {w} not in {SUPPORTED_HASH_WORDS}")
        a = 2 * rng.randrange(1 << (w - 1)) + 1   # uniform odd in [1, 2^w - 1]
        t = rng.randint(1, 1 << w)                # uniform in [1, 2^w]
        return cls(a, t, w)

    def bit(self, x: int) -> int:
        if not 1 <= x <= (1 << self.w):
            raise SketchError(f"input {x} outside [1, 2^{self.w}]")
        return 1 if (self.a * x) & ((1 << self.w) - 1) <= self.t else 0

    def __call__(self, x: int) -> int:
        return self.bit(x)

    def to_bits(self) -> bytes:
        """Little-endian packing of (a, t), each in a w-bit field."""
        val = self.a | (self.t << self.w)
        return val.to_bytes((2 * self.w + 7) // 8, "little")

    @classmethod
    def from_bits(cls, blob: bytes, w: int) -> "OddHash":
        val = int.from_bytes(blob, "little")
        mask = (1 << w) - 1
        return cls(val & mask, (val >> w) & ((1 << (w + 1)) - 1), w)


@dataclass(frozen=True)
class PairwiseHash:
    """((a*x + b) mod p) mod r, r a power of two, p a prime > universe."""
    a: int
    b: int
    p: int
    r: int

    @classmethod
    def draw(cls, rng: random.Random, p: int, r: int) -> "PairwiseHash":
        if r & (r - 1) or r < 2:
            raise ConfigError("range r must be a power of two >= 2")
        return cls(rng.randrange(1, p), rng.randrange(p), p, r)

    def value(self, x: int) -> int:
        return ((self.a * x + self.b) % self.p) % self.r

    def __call__(self, x: int) -> int:
        return self.value(x)


def prefix_parity_vector(h: PairwiseHash, xs: Iterable[int]) -> int:
    """Bit i (0-based) = parity of {x : h(x) < 2^(i+1)}, i < log2(r).

    Every hash value v < r contributes to all bits from bit_length(v)-1 up,
    so the vector is an XOR of suffix masks.
    """
    nbits = h.r.bit_length() - 1
    full = (1 << nbits) - 1
    vec = 0
    for x in xs:
        v = h.value(x)
        start = v.bit_length() - 1 if v else 0
        vec ^= full & ~((1 << start) - 1)
    return vec


def fingerprint_eval(p: int, alpha: int, xs: Iterable[int]) -> int:
    """prod(alpha - x) mod p over the multiset xs; empty product is 1."""
    acc = 1
    for x in xs:
        if x >= p:
            raise CapacityError(f"value {x} >= modulus {p}")
        acc = acc * (alpha - x) % p
    return acc


@dataclass(frozen=True)
class Fingerprint:
    """A fingerprint comparison outcome: both directed-product values."""
    p: int
    alpha: int
    up: int
    down: int

    @property
    def differs(self) -> bool:
        return self.up != self.down
