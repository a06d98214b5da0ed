"""Integer encodings for edges, cuts and CSP constraints, plus exact value functions.

Every sketch in the package works over a universe ``[0, N)``.  For graphs the
universe is the set of unordered vertex pairs ranked lexicographically; for
Max-CSP it is the set of (injective variable tuple, predicate) pairs.
"""
from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from math import perm

import numpy as np


class RejectedInput(ValueError):
    """Raised for malformed arguments (self-loops, out-of-range ids, ...)."""


class CapExceeded(RejectedInput):
    """A desk-scale cap (enumeration size, multiplicity) would be exceeded."""


class UndefinedValue(ValueError):
    """Raised when a normalized value is undefined, e.g. on an empty graph."""


@dataclass(frozen=True)
class EdgeUniverse:
    n: int

    @property
    def N(self) -> int:
        return self.n * (self.n - 1) // 2

    def encode(self, u: int, v: int) -> int:
        return encode_edge(u, v, self)

    def decode(self, e: int) -> tuple[int, int]:
        return decode_edge(e, self)

    def encode_many(self, us, vs) -> np.ndarray:
        u = np.asarray(us, dtype=np.int64)
        v = np.asarray(vs, dtype=np.int64)
        if np.any(u == v):
            raise RejectedInput("self-loop in edge batch")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        if lo.size and (lo.min() < 0 or hi.max() >= self.n):
            raise RejectedInput("vertex id out of range")
        return lo * (2 * self.n - lo - 1) // 2 + (hi - lo - 1)

    def decode_all(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoint arrays ``(u, v)`` for every index in ``[0, N)``."""
        u, v = np.triu_indices(self.n, k=1)
        return u.astype(np.int64), v.astype(np.int64)


def encode_edge(u: int, v: int, universe: EdgeUniverse) -> int:
    if u == v:
        raise RejectedInput(f"self-loop ({u}, {v})")
    n = universe.n
    if not (0 <= u < n and 0 <= v < n):
        raise RejectedInput(f"vertex out of range for n={n}: ({u}, {v})")
    a, b = (u, v) if u < v else (v, u)
    return a * (2 * n - a - 1) // 2 + (b - a - 1)


def decode_edge(e: int, universe: EdgeUniverse) -> tuple[int, int]:
    n = universe.n
    if not 0 <= e < universe.N:
        raise RejectedInput(f"edge index {e} outside [0, {universe.N})")
    a = 0
    row = n - 1
    while e >= row:
        e -= row
        a += 1
        row -= 1
    return a, a + 1 + e


@dataclass(frozen=True)
class Cut:
    """Side assignment; ``bits[i]`` is the side of vertex ``i``.

    Ordering is lexicographic on ``bits`` so ``min`` picks the canonical
    representative among ties.
    """

    bits: tuple[int, ...]

    @classmethod
    def from_string(cls, s: str) -> "Cut":
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "Cut":
        return cls(tuple((mask >> i) & 1 for i in range(n)))

    @classmethod
    def from_set(cls, members: Iterable[int], n: int) -> "Cut":
        s = set(members)
        return cls(tuple(1 if i in s else 0 for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def mask(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    def popcount(self) -> int:
        return sum(self.bits)

    def complement(self) -> "Cut":
        return Cut(tuple(1 - b for b in self.bits))

    def members(self) -> list[int]:
        return [i for i, b in enumerate(self.bits) if b]

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def crossing_set(x: Cut, universe: EdgeUniverse) -> Iterator[int]:
    """Stream the edge indices of the complete graph that cross ``x``.

    Nothing of size ``|C(x)|`` is materialized.
    """
    n = universe.n
    if x.n != n:
        raise RejectedInput(f"cut has length {x.n}, universe has n={n}")
    bits = x.bits
    for a in range(n):
        base = a * (2 * n - a - 1) // 2 - a - 1
        ba = bits[a]
        for b in range(a + 1, n):
            if bits[b] != ba:
                yield base + b


def crossing_size(x: Cut) -> int:
    s = x.popcount()
    return s * (x.n - s)


def inside_set(members: Sequence[int], universe: EdgeUniverse) -> Iterator[int]:
    """Stream all pairs with both endpoints in ``members`` (the completed subgraph)."""
    ms = sorted(members)
    for i, a in enumerate(ms):
        for b in ms[i + 1:]:
            yield encode_edge(a, b, universe)


@dataclass
class Graph:
    """Undirected graph given by a multiset of encoded edge indices."""

    n: int
    edges: list[int] = field(default_factory=list)

    def __post_init__(self):
        N = self.universe.N
        for e in self.edges:
            if not 0 <= e < N:
                raise RejectedInput(f"edge index {e} outside [0, {N})")

    @property
    def universe(self) -> EdgeUniverse:
        return EdgeUniverse(self.n)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "Graph":
        U = EdgeUniverse(n)
        return cls(n, [U.encode(u, v) for u, v in pairs])

    @property
    def distinct(self) -> list[int]:
        return sorted(set(self.edges))

    @property
    def m_distinct(self) -> int:
        return len(set(self.edges))

    def pairs(self) -> list[tuple[int, int]]:
        U = self.universe
        return [U.decode(e) for e in self.distinct]

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=np.int64)
        for u, v in self.pairs():
            A[u, v] = A[v, u] = 1
        return A


def crossing_count(G: Graph, x: Cut) -> int:
    """Number of distinct edges of ``G`` crossing ``x``."""
    if x.n != G.n:
        raise RejectedInput("cut length does not match graph")
    b = x.bits
    return sum(1 for u, v in G.pairs() if b[u] != b[v])


def cut_value(G: Graph, x: Cut) -> float:
    m = G.m_distinct
    if m == 0:
        raise UndefinedValue("cut value of an empty graph")
    return crossing_count(G, x) / m


# ---------------------------------------------------------------- Max-CSP


@dataclass(frozen=True)
class Constraint:
    vars: tuple[int, ...]
    table: tuple[int, ...]  # table[index(a_1..a_k)], index is base-q big-endian


@dataclass
class CspInstance:
    n: int
    k: int
    q: int
    constraints: list[Constraint] = field(default_factory=list)

    def __post_init__(self):
        for c in self.constraints:
            check_constraint(c, self.n, self.k, self.q)

    @property
    def universe_size(self) -> int:
        return csp_universe_size(self.n, self.k, self.q)


def csp_universe_size(n: int, k: int, q: int) -> int:
    return perm(n, k) * 2 ** (q ** k)


def check_constraint(c: Constraint, n: int, k: int, q: int) -> None:
    if len(c.vars) != k:
        raise RejectedInput(f"constraint arity {len(c.vars)} != k={k}")
    if len(set(c.vars)) != k:
        raise RejectedInput(f"variable tuple {c.vars} is not injective")
    if any(not 0 <= v < n for v in c.vars):
        raise RejectedInput(f"variable out of range in {c.vars}")
    if len(c.table) != q ** k or any(t not in (0, 1) for t in c.table):
        raise RejectedInput(f"predicate table must be {q ** k} bits")


def _table_index(values: Sequence[int], q: int) -> int:
    idx = 0
    for a in values:
        idx = idx * q + a
    return idx


def satisfies(c: Constraint, x: Sequence[int], q: int) -> bool:
    return c.table[_table_index([x[v] for v in c.vars], q)] == 1


def csp_value(phi: CspInstance, x: Sequence[int]) -> float:
    if len(x) != phi.n or any(not 0 <= a < phi.q for a in x):
        raise RejectedInput("assignment does not match instance shape")
    if not phi.constraints:
        raise UndefinedValue("value of an empty CSP instance")
    sat = sum(satisfies(c, x, phi.q) for c in phi.constraints)
    return sat / len(phi.constraints)


XOR = (0, 1, 1, 0)


def maxcut_as_csp(G: Graph) -> CspInstance:
    """Disequality-predicate embedding; one constraint per distinct edge."""
    return CspInstance(G.n, 2, 2, [Constraint((u, v), XOR) for u, v in G.pairs()])


def encode_constraint(c: Constraint, n: int, k: int, q: int) -> int:
    check_constraint(c, n, k, q)
    # rank of the injection among ordered k-tuples of distinct values
    rank = 0
    used: list[int] = []
    for i, v in enumerate(c.vars):
        smaller = v - sum(1 for w in used if w < v)
        rank += smaller * perm(n - i - 1, k - i - 1)
        used.append(v)
    pred = sum(bit << j for j, bit in enumerate(c.table))
    return rank * 2 ** (q ** k) + pred


def decode_constraint(code: int, n: int, k: int, q: int) -> Constraint:
    size = csp_universe_size(n, k, q)
    if not 0 <= code < size:
        raise RejectedInput(f"constraint code {code} outside [0, {size})")
    width = q ** k
    rank, pred = divmod(code, 2 ** width)
    free = list(range(n))
    vars_ = []
    for i in range(k):
        block = perm(n - i - 1, k - i - 1)
        j, rank = divmod(rank, block)
        vars_.append(free.pop(j))
    table = tuple((pred >> j) & 1 for j in range(width))
    return Constraint(tuple(vars_), table)


def satisfied_set(x: Sequence[int], n: int, k: int, q: int) -> Iterator[int]:
    """Stream the codes of every constraint in the universe that ``x`` satisfies."""
    width = q ** k
    npred = 2 ** width
    # predicates are grouped by which table entry the tuple hits
    by_entry = [[p for p in range(npred) if (p >> j) & 1] for j in range(width)]
    for rank, vs in enumerate(itertools.permutations(range(n), k)):
        j = _table_index([x[v] for v in vs], q)
        base = rank * npred
        for p in by_entry[j]:
            yield base + p


def satisfied_count(n: int, k: int, q: int) -> int:
    """``|T(x)|``; the same for every assignment."""
    return perm(n, k) * 2 ** (q ** k - 1)


def all_assignments(n: int, q: int) -> Iterator[tuple[int, ...]]:
    """Assignments in lexicographic order (variable 0 most significant)."""
    return itertools.product(range(q), repeat=n)


__all__ = [
    "RejectedInput", "CapExceeded", "UndefinedValue", "EdgeUniverse", "encode_edge", "decode_edge",
    "Cut", "crossing_set", "crossing_size", "inside_set", "Graph", "crossing_count",
    "cut_value", "Constraint", "CspInstance", "csp_universe_size", "csp_value",
    "satisfies", "maxcut_as_csp", "encode_constraint", "decode_constraint",
    "satisfied_set", "satisfied_count", "all_assignments", "XOR",
]
