"""Plain-text stream files and seeded instance generators.

One record per line::

    e u v      edge insertion between vertices u and v
    a x        insert x into set A (similarity)
    b x        insert x into set B (similarity)
    r x        stream element x (rarity, f0, sample)
    c code     encoded constraint (see ``encode_constraint``)
    # ...      comment

Vertex and element ids are arbitrary nonnegative integers; consumers remap
them densely in order of first appearance.  Constraint codes are kept as is.
"""
from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .universe import Constraint, EdgeUniverse, Graph, RejectedInput, encode_constraint

ARITY = {"e": 2, "a": 1, "b": 1, "r": 1, "c": 1}


class MalformedRecord(RejectedInput):
    pass


@dataclass
class StreamFile:
    records: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)

    @classmethod
    def parse(cls, text: str) -> "StreamFile":
        sf = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                sf.comments.append(line[1:].strip())
                continue
            parts = line.split()
            kind = parts[0]
            if kind not in ARITY:
                raise MalformedRecord(f"line {lineno}: unknown record type {kind!r}")
            if len(parts) != ARITY[kind] + 1:
                raise MalformedRecord(f"line {lineno}: {kind!r} takes {ARITY[kind]} field(s)")
            try:
                vals = tuple(int(p) for p in parts[1:])
            except ValueError:
                raise MalformedRecord(f"line {lineno}: non-integer field in {line!r}") from None
            if any(v < 0 for v in vals):
                raise MalformedRecord(f"line {lineno}: negative id")
            if kind == "e" and vals[0] == vals[1]:
                raise MalformedRecord(f"line {lineno}: self-loop on {vals[0]}")
            sf.records.append((kind, vals))
        return sf

    @classmethod
    def read(cls, path: str) -> "StreamFile":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def write(self) -> str:
        lines = [f"# {c}" for c in self.comments]
        lines += [" ".join([k, *map(str, v)]) for k, v in self.records]
        return "\n".join(lines) + "\n"

    def kinds(self) -> set[str]:
        return {k for k, _ in self.records}

    def only(self, *allowed: str) -> None:
        extra = self.kinds() - set(allowed)
        if extra:
            raise MalformedRecord(f"unexpected record type(s) {sorted(extra)}; "
                                  f"expected {list(allowed)}")

    # -- views ---------------------------------------------------------------
    def graph(self, n: int | None = None) -> tuple[Graph, list[int]]:
        """Edge records as a graph on dense ids; also returns dense -> original."""
        self.only("e")
        ids: dict[int, int] = {}
        pairs = []
        for _, (u, v) in self.records:
            a = ids.setdefault(u, len(ids))
            b = ids.setdefault(v, len(ids))
            pairs.append((a, b))
        size = len(ids) if n is None else n
        if size < len(ids):
            raise RejectedInput(f"stream mentions {len(ids)} vertices but n={n}")
        size = max(size, 2)
        back = sorted(ids, key=ids.get)
        # pad with fresh ids beyond any original one so the map stays injective
        nxt = max(back, default=-1) + 1
        back += list(range(nxt, nxt + size - len(back)))
        return Graph.from_pairs(size, pairs), back

    def elements(self, *tags: str) -> tuple[dict[str, list[int]], int]:
        """Per-tag dense element lists and the number of distinct ids."""
        self.only(*tags)
        ids: dict[int, int] = {}
        out: dict[str, list[int]] = {t: [] for t in tags}
        for k, (x,) in self.records:
            out[k].append(ids.setdefault(x, len(ids)))
        return out, len(ids)

    def tagged(self) -> tuple[list[tuple[str, int]], int]:
        self.only("a", "b")
        ids: dict[int, int] = {}
        return [(k, ids.setdefault(x, len(ids))) for k, (x,) in self.records], len(ids)

    def codes(self) -> list[int]:
        self.only("c")
        return [v[0] for _, v in self.records]


# ------------------------------------------------------------------ generators


def _edges(pairs: Iterable[tuple[int, int]], comment: str) -> StreamFile:
    return StreamFile([("e", (int(u), int(v))) for u, v in pairs], [comment])


def gen_erdos_renyi(n: int, p: float = 0.5, seed=None) -> StreamFile:
    rng = np.random.default_rng(seed)
    U = EdgeUniverse(n)
    u, v = U.decode_all()
    keep = rng.random(U.N) < p
    return _edges(zip(u[keep], v[keep]), f"erdos-renyi n={n} p={p} seed={seed}")


def gen_bip(n: int, S: Iterable[int] | None = None, seed=None) -> StreamFile:
    """Complete bipartite graph between ``S`` (default: first half) and its complement."""
    s = set(range(n // 2)) if S is None else set(S)
    pairs = [(a, b) if a < b else (b, a) for a in sorted(s) for b in range(n) if b not in s]
    if seed is not None:
        rng = np.random.default_rng(seed)
        pairs = [pairs[i] for i in rng.permutation(len(pairs))]
    return _edges(pairs, f"bip n={n} S={sorted(s)}")


def gen_planted_clique(n: int, size: int | None = None, p: float = 0.5, seed=None) -> StreamFile:
    rng = np.random.default_rng(seed)
    size = max(2, n // 2) if size is None else size
    clique = set(rng.choice(n, size, replace=False).tolist())
    U = EdgeUniverse(n)
    u, v = U.decode_all()
    pairs = [(a, b) for a, b in zip(u.tolist(), v.tolist())
             if (a in clique and b in clique) or rng.random() < p]
    return _edges(pairs, f"planted-clique n={n} size={size} p={p} clique={sorted(clique)}")


def gen_grr(n: int, k: int, seed=None) -> StreamFile:
    """Right vertex ``v`` becomes vertex ``n + v``."""
    from .hardlab import grr_sample
    G = grr_sample(n, k, seed)
    return _edges(((u, n + v) for u, v in G.edges), f"grr n={n} k={k} seed={seed}")


def gen_matching_union(n: int, k: int, seed=None) -> StreamFile:
    from .hardlab import matching_union_sample
    G = matching_union_sample(n, k, seed)
    return _edges(((u, n + v) for u, v in G.edges), f"matching-union n={n} k={k} seed={seed}")


def gen_csp_random(n: int, k: int, q: int, m: int, seed=None) -> StreamFile:
    """``m`` distinct constraints with uniform injective scopes and predicates."""
    rng = np.random.default_rng(seed)
    seen: set[int] = set()
    limit = math.perm(n, k) * 2 ** (q ** k)
    if m > limit:
        raise RejectedInput(f"only {limit} distinct constraints exist")
    while len(seen) < m:
        vars_ = tuple(int(x) for x in rng.choice(n, k, replace=False))
        table = tuple(int(b) for b in rng.integers(0, 2, q ** k))
        seen.add(encode_constraint(Constraint(vars_, table), n, k, q))
    codes = sorted(seen)
    codes = [codes[i] for i in rng.permutation(len(codes))]
    return StreamFile([("c", (c,)) for c in codes], [f"csp-random n={n} k={k} q={q} m={m}"])


def gen_multiplicity_profile(n: int, kmax: int, seed=None) -> StreamFile:
    """``n`` distinct elements, each repeated a uniform 1..kmax times, shuffled."""
    rng = np.random.default_rng(seed)
    mult = rng.integers(1, kmax + 1, n)
    elems = np.repeat(np.arange(n), mult)
    rng.shuffle(elems)
    return StreamFile([("r", (int(x),)) for x in elems],
                      [f"multiplicity-profile n={n} kmax={kmax}"])


def gen_distinct(n: int, seed=None) -> StreamFile:
    """``n`` distinct ids from a large range, with duplicates, shuffled."""
    rng = np.random.default_rng(seed)
    ids = rng.choice(10 * n + 10, n, replace=False)
    elems = np.concatenate([ids, rng.choice(ids, n // 2)])
    rng.shuffle(elems)
    return StreamFile([("r", (int(x),)) for x in elems], [f"distinct n={n}"])


def gen_sets(n: int, overlap: int, seed=None) -> StreamFile:
    """Two ``n``-element sets sharing ``overlap`` elements; Jaccard o/(2n-o)."""
    if not 0 <= overlap <= n:
        raise RejectedInput("overlap must lie in [0, n]")
    rng = np.random.default_rng(seed)
    ids = rng.choice(10 * n + 10, 2 * n - overlap, replace=False)
    recs = [("a", (int(x),)) for x in ids[:n]] + [("b", (int(x),)) for x in ids[n - overlap:]]
    recs = [recs[i] for i in rng.permutation(len(recs))]
    return StreamFile(recs, [f"sets n={n} overlap={overlap}"])


GENERATORS = {
    "erdos-renyi": gen_erdos_renyi,
    "bip": gen_bip,
    "planted-clique": gen_planted_clique,
    "grr": gen_grr,
    "matching-union": gen_matching_union,
    "csp-random": gen_csp_random,
    "multiplicity-profile": gen_multiplicity_profile,
    "distinct": gen_distinct,
    "sets": gen_sets,
}


def parse_gen(spec: str) -> tuple[str, dict]:
    """``kind`` or ``kind:N`` or ``kind:key=val,key=val``."""
    kind, _, rest = spec.partition(":")
    if kind not in GENERATORS:
        raise RejectedInput(f"unknown generator {kind!r}; choose from {sorted(GENERATORS)}")
    params: dict = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                key, val = "n", key
            try:
                params[key] = float(val) if "." in val else int(val)
            except ValueError:
                raise RejectedInput(f"bad generator parameter {item!r}") from None
    return kind, params


def generate(kind: str, params: dict, seed=None) -> StreamFile:
    if kind not in GENERATORS:
        raise RejectedInput(f"unknown generator {kind!r}")
    try:
        return GENERATORS[kind](**params, seed=seed)
    except TypeError as exc:
        raise RejectedInput(f"bad parameters for {kind}: {exc}") from None
