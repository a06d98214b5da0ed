"""Jaccard similarity and k-rarity estimators.

``similarity_f0`` combines three F0 sketches by inclusion-exclusion.  The
window estimators hash the (prime-padded) universe with a random affine
permutation and look only at elements landing in ``[0, t)``: because the hash
is a bijection, window slot ``i`` belongs to exactly one element, so bit
arrays / capped counters indexed by slot are exact on the window.
"""
from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from itertools import islice

import numpy as np

from .f0 import F0Params, F0Sketch
from .hashing import PermHash, next_prime, sample_perm_hash, splitmix64
from .universe import RejectedInput, UndefinedValue


def window_size(eps: float, alpha: float) -> int:
    """Window length ``1 / (10 delta^2 alpha)`` with ``delta = eps / 3``."""
    delta = eps / 3
    return max(1, math.ceil(1 / (10 * delta ** 2 * alpha) - 1e-9))


def chebyshev_window_size(eps: float, alpha: float) -> int:
    """Smallest window for which the per-event Chebyshev bound is at most 1/10."""
    delta = eps / 3
    return max(1, math.ceil(10 / (delta ** 2 * alpha) - 1e-9))


def similarity_f0(stream_a: Iterable[int], stream_b: Iterable[int], eps: float,
                  universe_size: int, seed: int = 0) -> float:
    params = F0Params(eps / 4, 1 / 9, universe_size)
    sa = F0Sketch(params, seed=splitmix64(seed * 3 + 0))
    sb = F0Sketch(params, seed=splitmix64(seed * 3 + 1))
    su = F0Sketch(params, seed=splitmix64(seed * 3 + 2))
    for stream, own in ((stream_a, sa), (stream_b, sb)):
        it = iter(stream)
        while block := list(islice(it, 4096)):
            own.update(block)
            su.update(block)
    fu = su.estimate()
    if fu == 0:
        raise UndefinedValue("similarity of two empty sets")
    return (sa.estimate() + sb.estimate() - fu) / fu


@dataclass
class SimWindow:
    h: PermHash
    t: int
    a: np.ndarray = field(init=False)
    b: np.ndarray = field(init=False)

    def __post_init__(self):
        self.a = np.zeros(self.t, dtype=bool)
        self.b = np.zeros(self.t, dtype=bool)

    def insert(self, which: str, w: int) -> None:
        if not 0 <= w < self.h.p:
            raise RejectedInput(f"element {w} outside the padded universe [0, {self.h.p})")
        i = self.h(w)
        if i < self.t:
            if which == "a":
                self.a[i] = True
            elif which == "b":
                self.b[i] = True
            else:
                raise RejectedInput(f"set tag must be 'a' or 'b', got {which!r}")

    def counts(self) -> tuple[int, int]:
        return int(np.sum(self.a & self.b)), int(np.sum(self.a | self.b))

    def estimate(self) -> float:
        x_cap, x_cup = self.counts()
        if x_cup == 0:
            raise UndefinedValue("no element of A or B landed in the sample window")
        return x_cap / x_cup


@dataclass
class RareWindow:
    h: PermHash
    t: int
    k: int
    a: np.ndarray = field(init=False)
    b: np.ndarray = field(init=False)

    def __post_init__(self):
        self.a = np.zeros(self.t, dtype=np.int64)
        self.b = np.zeros(self.t, dtype=bool)

    def insert(self, w: int) -> None:
        if not 0 <= w < self.h.p:
            raise RejectedInput(f"element {w} outside the padded universe [0, {self.h.p})")
        i = self.h(w)
        if i < self.t:
            if self.a[i] <= self.k:
                self.a[i] += 1
            self.b[i] = True

    def counts(self) -> tuple[int, int]:
        return int(np.sum(self.a == self.k)), int(np.sum(self.b))

    def estimate(self) -> float:
        xk, x = self.counts()
        if x == 0:
            raise UndefinedValue("no element landed in the sample window")
        return xk / x


def _window(universe_size: int, t: int | None, eps: float, alpha: float, seed):
    p = next_prime(max(universe_size, 2))
    h = sample_perm_hash(p, seed)
    return h, min(t if t is not None else window_size(eps, alpha), p)


def similarity_perm(stream_a: Iterable[int], stream_b: Iterable[int], eps: float,
                    alpha: float, universe_size: int, seed=None,
                    t: int | None = None) -> float:
    h, tt = _window(universe_size, t, eps, alpha, seed)
    win = SimWindow(h, tt)
    for w in stream_a:
        win.insert("a", w)
    for w in stream_b:
        win.insert("b", w)
    return win.estimate()


def similarity_perm_tagged(records: Iterable[tuple[str, int]], eps: float, alpha: float,
                           universe_size: int, seed=None, t: int | None = None) -> float:
    """Same as :func:`similarity_perm` for an arbitrarily interleaved tagged stream."""
    h, tt = _window(universe_size, t, eps, alpha, seed)
    win = SimWindow(h, tt)
    for tag, w in records:
        win.insert(tag, w)
    return win.estimate()


def rarity_perm(stream: Iterable[int], k: int, eps: float, alpha: float,
                universe_size: int, seed=None, t: int | None = None) -> float:
    if k < 1:
        raise RejectedInput("k must be >= 1")
    h, tt = _window(universe_size, t, eps, alpha, seed)
    win = RareWindow(h, tt, k)
    for w in stream:
        win.insert(w)
    return win.estimate()


def jaccard(a: Iterable[int], b: Iterable[int]) -> float:
    A, B = set(a), set(b)
    if not A | B:
        raise UndefinedValue("similarity of two empty sets")
    return len(A & B) / len(A | B)


def rarity(stream: Iterable[int], k: int) -> float:
    counts: dict[int, int] = {}
    for w in stream:
        counts[w] = counts.get(w, 0) + 1
    if not counts:
        raise UndefinedValue("rarity of an empty stream")
    return sum(1 for c in counts.values() if c == k) / len(counts)
