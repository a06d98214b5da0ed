"""Expander-walk subsampler for dense insertion streams.

Before the stream a random walk ``w_1..w_t`` is drawn on a strongly explicit
expander over (a square padding of) the element universe.  During the stream
each walk position keeps a counter of how often its vertex was inserted
(minus deleted); updates are processed in chunks that are bucketed with a
pairwise-independent hash so each chunk costs O(t) lookups.  Afterwards the
counters define a weighted sample ``sigma`` and any function mean over the
stream is estimated as ``M / (t |stream|) * sum_{i in sigma} f(i)``.

Expander: the Gabber-Galil graph on ``Z_s x Z_s`` (degree 8, second
eigenvalue at most ``5 sqrt(2) / 8``), powered ``r`` times so one logical walk
step is ``r`` base steps and the bound becomes ``(5 sqrt(2) / 8) ** r``.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .hashing import BucketHash
from .universe import CapExceeded, RejectedInput, UndefinedValue

BASE_DEGREE = 8
BASE_LAMBDA = 5 * math.sqrt(2) / 8
DEFAULT_CAP = 255


@njit(cache=True)
def _base_step(a, b, j, s):
    if j == 0:
        a = (a + 2 * b) % s
    elif j == 1:
        a = (a - 2 * b) % s
    elif j == 2:
        a = (a + 2 * b + 1) % s
    elif j == 3:
        a = (a - 2 * b - 1) % s
    elif j == 4:
        b = (b + 2 * a) % s
    elif j == 5:
        b = (b - 2 * a) % s
    elif j == 6:
        b = (b + 2 * a + 1) % s
    else:
        b = (b - 2 * a - 1) % s
    return a, b


@njit(cache=True)
def _walk_positions(start, choices, s):
    t = choices.shape[0] + 1
    out = np.empty(t, dtype=np.int64)
    a = start // s
    b = start % s
    out[0] = start
    for i in range(choices.shape[0]):
        for j in range(choices.shape[1]):
            a, b = _base_step(a, b, choices[i, j], s)
        out[i + 1] = a * s + b
    return out


@dataclass(frozen=True)
class ExpanderGraph:
    """Powered Gabber-Galil graph on ``M = s*s`` vertices."""

    N: int
    s: int
    power: int

    @property
    def M(self) -> int:
        return self.s * self.s

    @property
    def base_degree(self) -> int:
        return BASE_DEGREE

    @property
    def degree(self) -> int:
        return BASE_DEGREE ** self.power

    @property
    def lam(self) -> float:
        return BASE_LAMBDA ** self.power

    def base_neighbor(self, v: int, j: int) -> int:
        a, b = divmod(v, self.s)
        a, b = _base_step(a, b, j, self.s)
        return a * self.s + b

    def neighbor(self, v: int, i: int) -> int:
        """``i``-th neighbor, ``i`` in ``[0, degree)`` read as base-8 digits, low first."""
        if not 0 <= i < self.degree:
            raise RejectedInput(f"neighbor index {i} outside [0, {self.degree})")
        for _ in range(self.power):
            i, j = divmod(i, BASE_DEGREE)
            v = self.base_neighbor(v, j)
        return v

    def base_adjacency(self) -> np.ndarray:
        """Dense normalized base adjacency; only for spectral checks on small M."""
        M = self.M
        A = np.zeros((M, M))
        for v in range(M):
            for j in range(BASE_DEGREE):
                A[v, self.base_neighbor(v, j)] += 1.0 / BASE_DEGREE
        return A


def expander_build(N: int, lam: float) -> ExpanderGraph:
    if not 0 < lam < 1:
        raise RejectedInput(f"lambda must lie in (0, 1), got {lam}")
    if N < 1:
        raise RejectedInput("universe size must be positive")
    s = math.isqrt(N - 1) + 1
    power = 1
    while BASE_LAMBDA ** power > lam:
        power += 1
    return ExpanderGraph(N, s, power)


def second_eigenvalue(E: ExpanderGraph) -> float:
    ev = np.sort(np.abs(np.linalg.eigvalsh(E.base_adjacency())))[::-1]
    return float(ev[1]) if len(ev) > 1 else 0.0


@dataclass
class WalkSample:
    """Walk positions with per-position multiplicity counters.

    The walk is stored implicitly as a start vertex plus ``t - 1`` step
    choices (each ``power`` base digits); ``positions`` is its expansion.
    """

    expander: ExpanderGraph
    t: int
    start: int
    choices: np.ndarray
    positions: np.ndarray
    cap: int = DEFAULT_CAP
    seed: int | None = None
    counters: np.ndarray = field(init=False)
    c_s: int = field(init=False, default=0)

    def __post_init__(self):
        self.counters = np.zeros(self.t, dtype=np.int64)
        self._rng = np.random.default_rng(self.seed)
        self._vertices, self._inverse = np.unique(self.positions, return_inverse=True)
        self._pending: list[tuple[int, int]] = []

    @classmethod
    def exhaustive(cls, E: ExpanderGraph, cap: int = DEFAULT_CAP) -> "WalkSample":
        """Test hook: one position per vertex instead of a random walk."""
        M = E.M
        return cls(E, M, 0, np.zeros((0, E.power), dtype=np.uint8),
                   np.arange(M, dtype=np.int64), cap=cap, seed=0)

    @property
    def chunk_size(self) -> int:
        return max(1, math.ceil(self.t / math.log2(max(self.expander.M, 2))))

    def step_indices(self) -> list[int]:
        return [sum(int(d) << (3 * i) for i, d in enumerate(row)) for row in self.choices]

    # -- stream ----------------------------------------------------------------
    def process_chunk(self, updates: Sequence[tuple[int, int]]) -> None:
        N = self.expander.N
        for e, sgn in updates:
            if not 0 <= e < N:
                raise RejectedInput(f"element {e} outside [0, {N})")
            if sgn not in (1, -1):
                raise RejectedInput(f"update sign must be +1 or -1, got {sgn}")
        if not updates:
            return
        self.c_s += sum(sgn for _, sgn in updates)
        nb = 2 * len(updates)
        h_ins = BucketHash.sample(nb, self._rng)
        h_del = BucketHash.sample(nb, self._rng)
        z1: dict[int, list[int]] = defaultdict(list)
        z2: dict[int, list[int]] = defaultdict(list)
        for e, sgn in updates:
            if sgn > 0:
                z1[h_ins(e)].append(e)
            else:
                z2[h_del(e)].append(e)
        delta = np.zeros(len(self._vertices), dtype=np.int64)
        for i, w in enumerate(self._vertices.tolist()):
            c1 = z1[h_ins(w)].count(w) if z1 else 0
            c2 = z2[h_del(w)].count(w) if z2 else 0
            delta[i] = c1 - c2
        self.counters += delta[self._inverse]
        if self.counters.max(initial=0) > self.cap:
            j = int(np.argmax(self.counters))
            raise CapExceeded(
                f"element {int(self.positions[j])} exceeds multiplicity cap {self.cap}")

    def feed(self, updates: Iterable[tuple[int, int]]) -> None:
        """Buffer updates and flush full chunks."""
        z = self.chunk_size
        for u in updates:
            self._pending.append(u)
            if len(self._pending) == z:
                self.process_chunk(self._pending)
                self._pending = []

    def insert_all(self, elems: Iterable[int]) -> None:
        self.feed((int(e), 1) for e in elems)

    def flush(self) -> None:
        if self._pending:
            self.process_chunk(self._pending)
            self._pending = []

    # -- queries ---------------------------------------------------------------
    def sigma(self) -> Counter:
        """Sample as ``{vertex: copies}``; position ``j`` contributes ``max(c_j, 0)``."""
        self.flush()
        out: Counter = Counter()
        for w, c in zip(self.positions.tolist(), self.counters.tolist()):
            if c > 0:
                out[w] += c
        return out

    def scale(self) -> float:
        self.flush()
        if self.c_s <= 0:
            raise UndefinedValue("mean over an empty stream")
        return self.expander.M / (self.t * self.c_s)

    def estimate(self, f: Callable[[int], float]) -> float:
        scale = self.scale()
        return scale * sum(c * f(w) for w, c in self.sigma().items())

    def estimate_many(self, values: np.ndarray) -> np.ndarray:
        """Estimates for many functions at once.

        ``values`` has shape ``(num_functions, N)``; column ``e`` is ``f(e)``.
        """
        scale = self.scale()
        sig = self.sigma()
        if not sig:
            return np.zeros(values.shape[0])
        idx = np.fromiter(sig.keys(), dtype=np.int64)
        w = np.fromiter(sig.values(), dtype=np.float64)
        return scale * (values[:, idx] @ w)


def walk_sample(E: ExpanderGraph, t: int, seed=None, cap: int = DEFAULT_CAP) -> WalkSample:
    if t < 1:
        raise RejectedInput("walk length must be >= 1")
    rng = np.random.default_rng(seed)
    start = int(rng.integers(E.M))
    choices = rng.integers(0, BASE_DEGREE, size=(t - 1, E.power), dtype=np.uint8)
    positions = _walk_positions(start, choices, E.s)
    # the chunk-hash stream is derived from, but independent of, the walk draw
    return WalkSample(E, t, start, choices, positions, cap=cap,
                      seed=int(rng.integers(1 << 62)))


def sampler_process_chunk(ws: WalkSample, updates: Sequence[tuple[int, int]]) -> None:
    ws.process_chunk(updates)


def sampler_estimate(ws: WalkSample, f: Callable[[int], float]) -> float:
    return ws.estimate(f)


def reference_counters(positions: np.ndarray, updates: Iterable[tuple[int, int]]) -> np.ndarray:
    """Unbatched per-update scan; the oracle for the bucketed path."""
    pos = np.asarray(positions)
    c = np.zeros(len(pos), dtype=np.int64)
    for e, sgn in updates:
        c[pos == e] += sgn
    return c


def deviation_bound(eps: float, lam: float, alpha: float) -> float:
    return eps + lam / alpha


def run_sampler(elems: Iterable[int], N: int, t: int, lam: float, seed=None,
                cap: int = DEFAULT_CAP) -> WalkSample:
    ws = walk_sample(expander_build(N, lam), t, seed, cap)
    ws.insert_all(elems)
    ws.flush()
    return ws
