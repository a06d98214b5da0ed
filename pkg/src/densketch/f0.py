"""Distinct-elements (F0) sketch with clone-and-feed union queries.

The estimator is bottom-k ("k minimum values"): each repetition hashes the
universe injectively into 64-bit values and keeps the ``k`` smallest.  With
``k - 1`` over the normalized ``k``-th smallest value as the per-repetition
estimate, the relative standard deviation is about ``1/sqrt(k - 2)``; with
``k = ceil(SAMPLE_CONSTANT / eps**2)`` a single repetition misses the
``(1 +- eps)`` window with probability about ``P(|Z| > 2) ~ 0.046``.  The
median of ``r`` repetitions then fails with probability at most
``exp(-2 r (1/2 - 0.046)**2) <= exp(-0.41 r)`` (Hoeffding), so
``r = ceil(ln(1/delta) / 0.41)`` rounded up to odd meets a target ``delta``.

While the number of distinct elements is at most ``k`` the sketch simply
stores them and answers exactly.
"""
from __future__ import annotations

import math
import struct
from collections.abc import Iterable
from dataclasses import dataclass
from itertools import islice

import numpy as np

from .hashing import MASK64, splitmix64, splitmix64_array
from .universe import RejectedInput

SAMPLE_CONSTANT = 4.0
MEDIAN_RATE = 0.41
_TWO64 = float(1 << 64)
_MAGIC = b"F0SK"
_VERSION = 1
_HEADER = struct.Struct("<4sBB2xddQQIIQ")


@dataclass(frozen=True)
class F0Params:
    eps_rel: float
    delta: float
    universe_size: int

    def __post_init__(self):
        if not 0 < self.eps_rel < 1:
            raise RejectedInput(f"eps_rel must lie in (0, 1), got {self.eps_rel}")
        if not 0 < self.delta < 1:
            raise RejectedInput(f"delta must lie in (0, 1), got {self.delta}")
        if self.universe_size < 1:
            raise RejectedInput("universe_size must be positive")


def capacity_for(eps: float) -> int:
    return max(3, math.ceil(SAMPLE_CONSTANT / eps ** 2))


def repetitions_for(delta: float) -> int:
    r = max(1, math.ceil(math.log(1 / delta) / MEDIAN_RATE))
    return r if r % 2 else r + 1


def _rep_seeds(seed: int, reps: int) -> list[int]:
    out, s = [], seed & MASK64
    for _ in range(reps):
        s = splitmix64(s)
        out.append(s)
    return out


class F0Sketch:
    """Duplicate- and order-insensitive distinct count over ``[0, N)``.

    ``capacity`` overrides the sample size derived from ``eps_rel``; tests use
    it to force the sampling path on small universes.
    """

    def __init__(self, params: F0Params, seed: int = 0, capacity: int | None = None):
        self.params = params
        self.seed = int(seed)
        self.k = capacity if capacity is not None else capacity_for(params.eps_rel)
        if self.k < 3:
            raise RejectedInput("capacity must be at least 3")
        self.reps = repetitions_for(params.delta)
        self._rep_seeds = _rep_seeds(self.seed, self.reps)
        self._exact: set[int] | None = set()
        self._sig: list[np.ndarray] = []

    # -- state ---------------------------------------------------------------
    @property
    def exact_mode(self) -> bool:
        return self._exact is not None

    def clone(self) -> "F0Sketch":
        other = object.__new__(F0Sketch)
        other.params = self.params
        other.seed = self.seed
        other.k = self.k
        other.reps = self.reps
        other._rep_seeds = self._rep_seeds
        other._exact = None if self._exact is None else set(self._exact)
        # signature arrays are replaced, never mutated, so sharing is safe
        other._sig = list(self._sig)
        return other

    def _check(self, e: int) -> None:
        if not 0 <= e < self.params.universe_size:
            raise RejectedInput(f"element {e} outside [0, {self.params.universe_size})")

    def _materialize(self) -> None:
        elems = np.fromiter(self._exact, dtype=np.uint64, count=len(self._exact))
        self._exact = None
        self._sig = [np.empty(0, dtype=np.uint64) for _ in range(self.reps)]
        self._merge(elems)

    def _merge(self, elems: np.ndarray) -> None:
        for r, s in enumerate(self._rep_seeds):
            hv = splitmix64_array(elems ^ np.uint64(s))
            self._sig[r] = np.union1d(self._sig[r], hv)[: self.k]

    # -- updates -------------------------------------------------------------
    def insert(self, e: int) -> None:
        self._check(e)
        if self._exact is not None:
            self._exact.add(e)
            if len(self._exact) > self.k:
                self._materialize()
            return
        for r, s in enumerate(self._rep_seeds):
            h = splitmix64(e ^ s)
            sig = self._sig[r]
            if len(sig) == self.k and h >= int(sig[-1]):
                continue
            i = int(np.searchsorted(sig, np.uint64(h)))
            if i < len(sig) and int(sig[i]) == h:
                continue
            self._sig[r] = np.insert(sig, i, np.uint64(h))[: self.k]

    def update(self, elems: Iterable[int], chunk: int = 4096) -> None:
        """Insert many elements, consuming ``elems`` as a one-pass stream."""
        it = iter(elems)
        while True:
            block = list(islice(it, chunk))
            if not block:
                return
            if self._exact is not None:
                for e in block:
                    self._check(e)
                    self._exact.add(e)
                if len(self._exact) > self.k:
                    self._materialize()
                continue
            arr = np.asarray(block, dtype=np.int64)
            if arr.min() < 0 or arr.max() >= self.params.universe_size:
                raise RejectedInput("element outside the sketch universe")
            self._merge(arr.astype(np.uint64))

    # -- queries -------------------------------------------------------------
    def estimate(self) -> float:
        if self._exact is not None:
            return float(len(self._exact))
        ests = [(self.k - 1) / ((float(sig[-1]) + 1.0) / _TWO64) for sig in self._sig]
        return float(np.median(ests))

    def estimate_union(self, offline: Iterable[int]) -> float:
        """Estimate ``|inserted ∪ offline|`` on a clone; ``self`` is untouched."""
        c = self.clone()
        c.update(offline)
        return c.estimate()

    # -- serialization -------------------------------------------------------
    def to_bytes(self) -> bytes:
        p = self.params
        exact = self._exact is not None
        body = [
            _HEADER.pack(_MAGIC, _VERSION, int(exact), p.eps_rel, p.delta,
                         p.universe_size, self.seed & MASK64, self.k, self.reps,
                         len(self._exact) if exact else len(self._sig))
        ]
        if exact:
            body.append(np.array(sorted(self._exact), dtype="<u8").tobytes())
        else:
            for sig in self._sig:
                body.append(struct.pack("<Q", len(sig)))
                body.append(sig.astype("<u8").tobytes())
        return b"".join(body)

    @classmethod
    def from_bytes(cls, data: bytes) -> "F0Sketch":
        magic, ver, exact, eps, delta, N, seed, k, reps, count = _HEADER.unpack_from(data)
        if magic != _MAGIC or ver != _VERSION:
            raise RejectedInput("not an F0 sketch snapshot (bad magic or version)")
        sk = cls(F0Params(eps, delta, N), seed=seed, capacity=k)
        off = _HEADER.size
        if exact:
            sk._exact = set(int(x) for x in np.frombuffer(data, "<u8", count, off))
        else:
            sk._exact = None
            sk._sig = []
            for _ in range(count):
                (ln,) = struct.unpack_from("<Q", data, off)
                off += 8
                sk._sig.append(np.frombuffer(data, "<u8", ln, off).astype(np.uint64))
                off += 8 * ln
        return sk


def f0_new(params: F0Params, seed: int = 0, capacity: int | None = None) -> F0Sketch:
    return F0Sketch(params, seed, capacity)


def f0_insert(sk: F0Sketch, elem: int) -> None:
    sk.insert(elem)


def f0_estimate(sk: F0Sketch) -> float:
    return sk.estimate()


def f0_estimate_union(sk: F0Sketch, offline: Iterable[int]) -> float:
    return sk.estimate_union(offline)


def f0_intersection_via_ie(count_a: float, count_b: float, union_estimate: float) -> float:
    return count_a + count_b - union_estimate
