"""Affine hash families over prime fields.

``PermHash`` is ``x -> (c*x + d) mod p`` with ``c != 0``: a bijection of
``[0, p)`` whose image of any two distinct points is uniform over ordered
pairs of distinct values.  ``BucketHash`` is the usual Carter-Wegman family
reduced into a bucket range.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sympy import isprime, nextprime

from .universe import RejectedInput

MERSENNE61 = (1 << 61) - 1
MASK64 = (1 << 64) - 1


def next_prime(n: int) -> int:
    """Smallest prime ``>= n``."""
    return 2 if n <= 2 else int(nextprime(n - 1))


def next_prime_1mod4(n: int) -> int:
    """Smallest prime ``p >= n`` with ``p % 4 == 1``; ``p <= 2n`` for ``n >= 7``."""
    if n < 7:
        raise RejectedInput(f"n must be >= 7, got {n}")
    p = n
    while not (p % 4 == 1 and isprime(p)):
        p += 1
    return p


@dataclass(frozen=True)
class PermHash:
    p: int
    c: int
    d: int

    def __post_init__(self):
        if not (1 <= self.c < self.p and 0 <= self.d < self.p):
            raise RejectedInput(f"invalid (c, d) = ({self.c}, {self.d}) for p={self.p}")

    def __call__(self, x: int) -> int:
        return (self.c * x + self.d) % self.p

    def many(self, xs) -> np.ndarray:
        # c*x < p^2 must fit in int64; fall back to object arithmetic above that
        xs = np.asarray(xs, dtype=np.int64)
        if self.p < (1 << 31):
            return (self.c * xs + self.d) % self.p
        return np.array([self(int(x)) for x in xs], dtype=np.int64)

    def inverse(self, y: int) -> int:
        return ((y - self.d) * pow(self.c, -1, self.p)) % self.p


def perm_hash_eval(h: PermHash, x: int) -> int:
    if not 0 <= x < h.p:
        raise RejectedInput(f"x={x} outside [0, {h.p})")
    return h(x)


def sample_perm_hash(p: int, seed=None) -> PermHash:
    rng = np.random.default_rng(seed)
    c = int(rng.integers(1, p))
    d = int(rng.integers(0, p))
    return PermHash(p, c, d)


def all_perm_hashes(p: int):
    """Every member of the family, for exact enumeration over seeds."""
    for c in range(1, p):
        for d in range(p):
            yield PermHash(p, c, d)


@dataclass(frozen=True)
class BucketHash:
    """``((a*x + b) mod 2^61-1) mod buckets``; pairwise independent up to o(1)."""

    a: int
    b: int
    buckets: int

    @classmethod
    def sample(cls, buckets: int, rng: np.random.Generator) -> "BucketHash":
        a = int(rng.integers(1, MERSENNE61))
        b = int(rng.integers(0, MERSENNE61))
        return cls(a, b, buckets)

    def __call__(self, x: int) -> int:
        return ((self.a * x + self.b) % MERSENNE61) % self.buckets


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def splitmix64_array(xs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`splitmix64`; agrees bit-for-bit with the scalar version."""
    x = np.asarray(xs).astype(np.uint64)
    with np.errstate(over="ignore"):
        x = x + np.uint64(0x9E3779B97F4A7C15)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))
