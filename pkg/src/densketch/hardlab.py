"""Finite, checkable pieces of the Max-Cut lower-bound constructions.

Covers conditional Max-Cut on bipartite graphs (discrepancy, value, optimum,
loss, slack, advantage), the deletion-method hard family, the sink gadgets,
complete-bipartite instances, Hamming-ball packings, and the signed-matrix
value-gap construction.  Assignments on bipartite sides are +1/-1 vectors;
``sign(0)`` is taken to be ``+1`` throughout.
"""
from __future__ import annotations

import hashlib
import itertools
import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .universe import EdgeUniverse, Graph, RejectedInput

MAX_WEIGHTED_BRUTE = 22
MAX_SHARED_BRUTE = 20
RADEMACHER_FLOOR = 9 / 512
# optimal p=1 Khintchine constant (Szarek): E|sum a_i r_i| >= ||a||_2 / sqrt(2)
KHINTCHINE_C = 1 / math.sqrt(2)


def sign(a) -> int:
    return 1 if a >= 0 else -1


# ------------------------------------------------------------ bipartite graphs


@dataclass
class BipartiteInstance:
    """Bipartite (multi)graph; ``edges`` holds ``(left, right)`` pairs."""

    nL: int
    nR: int
    edges: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < self.nL and 0 <= v < self.nR):
                raise RejectedInput(f"edge ({u}, {v}) outside {self.nL}x{self.nR}")

    def right_neighbors(self) -> list[list[int]]:
        nb: list[list[int]] = [[] for _ in range(self.nR)]
        for u, v in self.edges:
            nb[v].append(u)
        return nb

    def left_degrees(self) -> np.ndarray:
        d = np.zeros(self.nL, dtype=np.int64)
        for u, _ in self.edges:
            d[u] += 1
        return d

    def right_degrees(self) -> np.ndarray:
        d = np.zeros(self.nR, dtype=np.int64)
        for _, v in self.edges:
            d[v] += 1
        return d

    def matrix(self) -> np.ndarray:
        """``nL x nR`` edge-multiplicity matrix."""
        A = np.zeros((self.nL, self.nR), dtype=np.int64)
        for u, v in self.edges:
            A[u, v] += 1
        return A

    def is_right_regular(self, k: int) -> bool:
        return bool(np.all(self.right_degrees() == k))

    def fingerprint(self) -> str:
        data = ",".join(f"{u}-{v}" for u, v in sorted(self.edges))
        return hashlib.sha1(f"{self.nL}x{self.nR}:{data}".encode()).hexdigest()[:12]


def disc(G: BipartiteInstance, x: Sequence[int], v: int) -> int:
    if not 0 <= v < G.nR:
        raise RejectedInput(f"{v} is not a right vertex")
    return sum(x[u] for u, w in G.edges if w == v)


def discs(G: BipartiteInstance, x: Sequence[int]) -> np.ndarray:
    """Discrepancy of every right vertex."""
    d = np.zeros(G.nR, dtype=np.int64)
    for u, v in G.edges:
        d[v] += x[u]
    return d


def cval(G: BipartiteInstance, x: Sequence[int], y: Sequence[int]) -> float:
    return len(G.edges) / 2 - 0.5 * float(np.dot(np.asarray(y), discs(G, x)))


def copt(G: BipartiteInstance, x: Sequence[int]) -> float:
    return len(G.edges) / 2 + 0.5 * float(np.abs(discs(G, x)).sum())


def closs(G: BipartiteInstance, x: Sequence[int], y: Sequence[int]) -> float:
    d = discs(G, x)
    return 0.5 * float((np.abs(d) + np.asarray(y) * d).sum())


def optimal_right(G: BipartiteInstance, x: Sequence[int]) -> np.ndarray:
    return np.array([-sign(d) for d in discs(G, x)], dtype=np.int64)


def copt_brute(G: BipartiteInstance, x: Sequence[int]) -> float:
    """Maximum of the edge-by-edge value over all right assignments."""
    if G.nR > MAX_SHARED_BRUTE:
        raise RejectedInput(f"nR={G.nR} too large for brute force")
    best = -math.inf
    for y in itertools.product((1, -1), repeat=G.nR):
        val = sum(1 - x[u] * y[v] for u, v in G.edges) / 2
        best = max(best, val)
    return best


def slack(a, b):
    return abs(a) + abs(b) - abs(a + b)


def advantage(G1: BipartiteInstance, G2: BipartiteInstance, x: Sequence[int], v: int):
    return slack(disc(G1, x, v), disc(G2, x, v))


def total_advantage(G1: BipartiteInstance, G2: BipartiteInstance, x: Sequence[int]) -> int:
    d1, d2 = discs(G1, x), discs(G2, x)
    return int((np.abs(d1) + np.abs(d2) - np.abs(d1 + d2)).sum())


@dataclass
class SharedGood:
    exists: bool
    witness: np.ndarray | None
    min_total_loss: float
    total_advantage: int


def check_shared_good(G1: BipartiteInstance, G2: BipartiteInstance, x: Sequence[int],
                      tau: float) -> SharedGood:
    """Decide whether some ``y`` has loss ``<= tau`` in both graphs.

    Per right vertex, choosing ``y_v = -sign(D1)`` costs ``(0, l2)`` and the
    opposite costs ``(|D1|, ...)``; when the discrepancies agree in sign one
    choice is free for both.  The remaining conflicts are a two-bin subset
    sum, solved exactly by DP over the first graph's budget.
    """
    d1, d2 = discs(G1, x), discs(G2, x)
    if G1.nR != G2.nR:
        raise RejectedInput("graphs must share the right side")
    y = np.empty(G1.nR, dtype=np.int64)
    conflicts = []
    for v in range(G1.nR):
        a, b = int(d1[v]), int(d2[v])
        if slack(a, b) == 0:
            # a zero discrepancy is indifferent, so follow the other graph
            y[v] = -sign(a if a != 0 else b)
        else:
            conflicts.append(v)
    # charge[v] = True -> y_v follows G2 (cost |D1| to G1), else follows G1 (cost |D2| to G2)
    budget = math.floor(tau)
    best: dict[int, tuple[int, frozenset]] = {0: (0, frozenset())}
    for v in conflicts:
        c1, c2 = abs(int(d1[v])), abs(int(d2[v]))
        nxt: dict[int, tuple[int, frozenset]] = {}
        for s1, (s2, chosen) in best.items():
            for ns1, ns2, ch in ((s1, s2 + c2, chosen), (s1 + c1, s2, chosen | {v})):
                if ns1 <= budget and (ns1 not in nxt or ns2 < nxt[ns1][0]):
                    nxt[ns1] = (ns2, ch)
        best = nxt
    adv = total_advantage(G1, G2, x)
    feasible = [(s1, s2, ch) for s1, (s2, ch) in best.items() if s2 <= tau]
    if not feasible:
        return SharedGood(False, None, adv / 2, adv)
    s1, s2, chosen = min(feasible, key=lambda r: (r[0] + r[1], r[0]))
    for v in conflicts:
        y[v] = -sign(int(d2[v])) if v in chosen else -sign(int(d1[v]))
    return SharedGood(True, y, adv / 2, adv)


def shared_good_brute(G1: BipartiteInstance, G2: BipartiteInstance, x: Sequence[int],
                      tau: float) -> tuple[bool, float]:
    """Exhaustive check; also returns ``min_y closs1 + closs2``."""
    if G1.nR > MAX_SHARED_BRUTE:
        raise RejectedInput("too many right vertices for brute force")
    exists, best = False, math.inf
    for y in itertools.product((1, -1), repeat=G1.nR):
        l1, l2 = closs(G1, x, y), closs(G2, x, y)
        best = min(best, l1 + l2)
        if l1 <= tau and l2 <= tau:
            exists = True
    return exists, best


# ------------------------------------------------------------- hard family


@dataclass
class HardFamilyParams:
    """Constants of the hard-family construction.

    ``eps0`` and the size/stretch constants have no finite values in the
    construction; the defaults here are placeholders for experiments.
    """

    n: int
    k: int
    eta_near: float = 1e-8
    eta_tail: float = 1 / 8000
    C_deg: float = 10.0
    C_size: float = 1.0
    C_stretch: float = 1.0
    C_den: float = 1e6
    rho: float = 1e-6
    eps0: float = 1e-12

    def __post_init__(self):
        for name in ("n", "k", "eta_near", "eta_tail", "C_deg", "C_size", "C_stretch",
                     "C_den", "rho", "eps0"):
            if getattr(self, name) <= 0:
                raise RejectedInput(f"{name} must be positive")

    @property
    def tau(self) -> float:
        return self.n * math.sqrt(self.k) / 2000

    @property
    def in_regime(self) -> bool:
        return self.n >= self.C_stretch * self.k


def grr_sample(n: int, k: int, seed=None) -> BipartiteInstance:
    """Every right vertex picks a uniform ``k``-subset of the ``n`` left vertices."""
    if k > n:
        raise RejectedInput("k must not exceed n")
    rng = np.random.default_rng(seed)
    edges = [(int(u), v) for v in range(n) for u in rng.choice(n, k, replace=False)]
    return BipartiteInstance(n, n, edges)


def tail_deg(G: BipartiteInstance, d: int) -> int:
    deg = G.left_degrees()
    return int(deg[deg > d].sum())


def overlap(G1: BipartiteInstance, G2: BipartiteInstance) -> int:
    return sum((Counter(G1.edges) & Counter(G2.edges)).values())


def hard_family_filter(candidates: Sequence[BipartiteInstance], params: HardFamilyParams):
    """Deletion method: drop per-graph violators, then one graph per bad pair."""
    n, k = params.n, params.k
    stats = {"candidates": len(candidates), "not_regular": 0, "deg2": 0, "tail": 0,
             "overlap_pairs": 0}
    alive = []
    for G in candidates:
        bad = False
        if not G.is_right_regular(k):
            stats["not_regular"] += 1
            bad = True
        if (G.left_degrees() ** 2).sum() > params.C_deg * n * k ** 2:
            stats["deg2"] += 1
            bad = True
        if tail_deg(G, 2 * k) > params.eta_tail * n * math.sqrt(k):
            stats["tail"] += 1
            bad = True
        if not bad:
            alive.append(G)
    removed = set()
    for i, j in itertools.combinations(range(len(alive)), 2):
        if i in removed or j in removed:
            continue
        if overlap(alive[i], alive[j]) > params.eta_near * n * k:
            stats["overlap_pairs"] += 1
            removed.add(j)
    family = [G for i, G in enumerate(alive) if i not in removed]
    stats["survivors"] = len(family)
    return family, stats


def rademacher_min_mean(m: int, samples: int, seed=None) -> float:
    """Monte-Carlo ``E[min(|X|, |Y|)]`` for independent length-``m`` Rademacher sums."""
    rng = np.random.default_rng(seed)
    # a length-m Rademacher sum is 2*Binomial(m, 1/2) - m
    X = 2 * rng.binomial(m, 0.5, samples) - m
    Y = 2 * rng.binomial(m, 0.5, samples) - m
    return float(np.minimum(np.abs(X), np.abs(Y)).mean())


def separation_rate(G1: BipartiteInstance, G2: BipartiteInstance, tau: float,
                    trials: int, seed=None) -> float:
    """Fraction of uniform left assignments with a shared tau-good right assignment."""
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(trials):
        x = rng.choice((-1, 1), G1.nL)
        hits += check_shared_good(G1, G2, x, tau).exists
    return hits / trials


# ------------------------------------------------------------------ gadgets


@dataclass
class WeightedGraph:
    n: int
    edges: list[tuple[int, int, int]] = field(default_factory=list)

    def __post_init__(self):
        for u, v, w in self.edges:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise RejectedInput(f"bad weighted edge ({u}, {v})")
            if w < 1:
                raise RejectedInput("weights must be >= 1")

    def degree(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=np.int64)
        for u, v, w in self.edges:
            d[u] += w
            d[v] += w
        return d


def cut_weight(W: WeightedGraph, z: Sequence[int]) -> int:
    return sum(w for u, v, w in W.edges if z[u] != z[v])


def bipartite_as_weighted(G: BipartiteInstance) -> WeightedGraph:
    """Left vertex ``u`` -> ``u``, right ``v`` -> ``nL + v``; parallel edges summed."""
    cnt = Counter(G.edges)
    return WeightedGraph(G.nL + G.nR, [(u, G.nL + v, c) for (u, v), c in sorted(cnt.items())])


def gadget_cond(G: BipartiteInstance, x: Sequence[int], params: HardFamilyParams) -> WeightedGraph:
    """``G`` plus sinks ``s+ = nL+nR`` and ``s- = nL+nR+1``."""
    if len(x) != G.nL:
        raise RejectedInput("x must assign every left vertex")
    base = bipartite_as_weighted(G)
    sp, sm = G.nL + G.nR, G.nL + G.nR + 1
    edges = list(base.edges)
    edges.append((sp, sm, int(10 ** 5 * params.n * params.k)))
    for u in range(G.nL):
        edges.append((u, sm if x[u] == 1 else sp, 2 * params.k))
    return WeightedGraph(base.n + 2, edges)


def regular_degree(A: WeightedGraph) -> int:
    d = A.degree()
    if len(set(d.tolist())) != 1:
        raise RejectedInput("graph is not regular")
    return int(d[0])


def gadget_det(A: WeightedGraph, x: Sequence[int]) -> WeightedGraph:
    """Sinks ``s+ = N`` and ``s- = N+1``; ``A`` must be ``k``-regular."""
    N = A.n
    if len(x) != N:
        raise RejectedInput("x must assign every vertex")
    k = regular_degree(A)
    sp, sm = N, N + 1
    edges = list(A.edges)
    edges.append((sp, sm, 5000 * N * k))
    for w in range(N):
        edges.append((w, sm if x[w] == 1 else sp, 100 * k))
    return WeightedGraph(N + 2, edges)


def gadget_det_prediction(A: WeightedGraph, x: Sequence[int]) -> int:
    """``5000 N k + 100 N k + cutweight(A, x)``."""
    N, k = A.n, regular_degree(A)
    return 5000 * N * k + 100 * N * k + cut_weight(A, x)


def _cut_weights_all(W: WeightedGraph) -> np.ndarray:
    """Cut weight of every assignment with vertex 0 on side 0, lex order."""
    n = W.n
    if n > MAX_WEIGHTED_BRUTE:
        raise RejectedInput(f"{n} vertices exceed the brute-force cap {MAX_WEIGHTED_BRUTE}")
    total = 2 ** (n - 1)
    out = np.zeros(total, dtype=np.int64)
    if not W.edges:
        return out
    u = np.array([e[0] for e in W.edges], dtype=np.int64)
    v = np.array([e[1] for e in W.edges], dtype=np.int64)
    w = np.array([e[2] for e in W.edges], dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    for lo in range(0, total, 1 << 15):
        idx = np.arange(lo, min(total, lo + (1 << 15)), dtype=np.int64)
        X = (idx[:, None] >> shifts[None, :]) & 1
        out[lo:lo + len(idx)] = (X[:, u] != X[:, v]) @ w
    return out


def weighted_maxcut_brute(W: WeightedGraph) -> tuple[tuple[int, ...], int]:
    """Exact optimum; ties go to the lexicographically smallest cut with bit 0 = 0."""
    n = W.n
    vals = _cut_weights_all(W)
    j = int(np.argmax(vals))
    return tuple((j >> (n - 1 - i)) & 1 for i in range(n)), int(vals[j])


def weighted_maxcut_recount(W: WeightedGraph) -> int:
    """Second, loop-based enumeration over all 2^n assignments."""
    best = 0
    for z in itertools.product((0, 1), repeat=W.n):
        best = max(best, cut_weight(W, z))
    return best


def cond_to_plain_experiment(G: BipartiteInstance, x: Sequence[int], eps: float,
                             params: HardFamilyParams) -> dict:
    """Among (1-eps)-optimal cuts of ``G ∪ H_x``, how many induce a tau-good ``y``."""
    W = gadget_cond(G, x, params)
    vals = _cut_weights_all(W)
    opt = int(vals.max())
    near = np.nonzero(vals >= (1 - eps) * opt)[0]
    n = W.n
    good = 0
    for j in near.tolist():
        z = [(j >> (n - 1 - i)) & 1 for i in range(n)]
        # map 0/1 sides to +-1 with s+ on +1
        sp = z[G.nL + G.nR]
        pm = [1 if zi == sp else -1 for zi in z]
        y = pm[G.nL:G.nL + G.nR]
        good += closs(G, x, y) <= params.tau
    return {"opt": opt, "near_optimal": len(near), "tau_good": good,
            "rate": good / len(near) if len(near) else float("nan")}


# -------------------------------------------------- complete-bipartite graphs


def _check_split(S: Iterable[int], n: int) -> set[int]:
    s = set(S)
    if not s or len(s) >= n or any(not 0 <= i < n for i in s):
        raise RejectedInput("S must be a nonempty proper subset of [n]")
    return s


def bip_instance(S: Iterable[int], n: int) -> Graph:
    s = _check_split(S, n)
    U = EdgeUniverse(n)
    return Graph(n, sorted(U.encode(a, b) for a in s for b in range(n) if b not in s))


def bip_cut_value_formula(S: Iterable[int], T: Iterable[int], n: int) -> Fraction:
    s = _check_split(S, n)
    t = set(T)
    sbar = set(range(n)) - s
    # p = |S \ T|/|S| and q = |S̄ ∩ T|/|S̄|; value 1 - ((1-p)q + p(1-q)), over one denominator
    a, b = len(s - t), len(sbar & t)
    ns, nb = len(s), len(sbar)
    return Fraction(ns * nb - (ns - a) * b - a * (nb - b), ns * nb)


# ----------------------------------------------------------- Hamming balls


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def ball_size(n: int, r: int) -> int:
    return sum(math.comb(n, i) for i in range(r + 1))


def entropy_bound_holds(n: int, delta: float) -> bool:
    """Exact check of ``sum_{i <= floor(delta n)} C(n, i) <= 2^(n H(delta))``.

    For ``delta = i/n`` the right side is the rational ``n^n / (i^i (n-i)^(n-i))``
    and the comparison is done in integers; otherwise the logarithms are compared.
    """
    r = math.floor(delta * n)
    lhs = ball_size(n, r)
    if Fraction(delta).limit_denominator(10 ** 6) * n == r:
        i = r
        return lhs * (i ** i) * ((n - i) ** (n - i)) <= n ** n
    return math.log2(lhs) <= n * binary_entropy(delta) + 1e-12


def balls_collide(x: np.ndarray, y: np.ndarray, delta: float) -> bool:
    """Do the double balls (around a string and its complement) intersect?"""
    n = len(x)
    r = math.floor(delta * n)
    d = int(np.sum(x != y))
    return d <= 2 * r or d >= n - 2 * r


def hamming_family(n: int, delta: float, trials: int, seed=None):
    if not 0 < delta < 0.5:
        raise RejectedInput("delta must lie in (0, 1/2)")
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, size=(trials, n), dtype=np.int8)
    w = X.sum(axis=1) / n
    keep = [i for i in range(trials) if 1 / 3 <= w[i] <= 2 / 3]
    stats = {"trials": trials, "weight_rejects": trials - len(keep), "collision_rejects": 0}
    family: list[np.ndarray] = []
    for i in keep:
        if any(balls_collide(X[i], f, delta) for f in family):
            stats["collision_rejects"] += 1
            continue
        family.append(X[i])
    stats["survivors"] = len(family)
    stats["ball_size"] = ball_size(n, math.floor(delta * n))
    stats["entropy_bound"] = 2 ** (n * binary_entropy(delta))
    return family, stats


# ------------------------------------------------------------- value gap


def matching_union_sample(n: int, k: int, seed=None) -> BipartiteInstance:
    if k > n:
        raise RejectedInput("k must not exceed n")
    rng = np.random.default_rng(seed)
    edges = []
    for _ in range(k):
        pi = rng.permutation(n)
        edges.extend((u, int(pi[u])) for u in range(n))
    return BipartiteInstance(n, n, edges)


def signed_matrix(A1: BipartiteInstance, A2: BipartiteInstance) -> np.ndarray:
    return A1.matrix() - A2.matrix()


def bipartite_cut_weight(A: BipartiteInstance, x: Sequence[int], y: Sequence[int]) -> int:
    """Unnormalized cut weight of ``(x on L, y on R)``; parallel edges count separately."""
    return sum(1 for u, v in A.edges if x[u] != y[v])


@dataclass
class ValueGap:
    x: np.ndarray
    y: np.ndarray
    gap: float
    first_gap: float
    m: int
    floor: float
    identity_holds: bool


def value_gap_experiment(A1: BipartiteInstance, A2: BipartiteInstance, seed=None,
                         restarts: int = 32) -> ValueGap:
    n = A1.nL
    if (A1.nL, A1.nR) != (A2.nL, A2.nR) or A1.nL != A1.nR:
        raise RejectedInput("graphs must share L and R with |L| = |R|")
    degs = {tuple(A.left_degrees()) + tuple(A.right_degrees()) for A in (A1, A2)}
    k = int(A1.left_degrees()[0]) if n else 0
    if len(degs) != 1 or any(d != k for d in next(iter(degs))):
        raise RejectedInput("both graphs must be k-regular with the same k")
    B = signed_matrix(A1, A2)
    m = int(np.abs(B).sum())
    rng = np.random.default_rng(seed)
    best = None
    identity = True
    first = None
    for _ in range(restarts):
        y = rng.choice((-1, 1), n)
        By = B @ y
        x = np.where(By >= 0, 1, -1)
        val = int(x @ B @ y)
        identity &= val == int(np.abs(By).sum())
        gap = abs(val) / 2
        if first is None:
            first = gap
        if best is None or gap > best[0]:
            best = (gap, x, y)
    floor = KHINTCHINE_C / math.sqrt(2) * m / math.sqrt(k) if k else 0.0
    return ValueGap(best[1], best[2], best[0], first, m, floor, identity)
