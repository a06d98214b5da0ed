"""Dense-stream (1 - eps)-approximations for Max-Cut, Densest Subgraph and Max-CSP.

Each problem has two streaming variants:

* ``f0``: during the stream feed the elements into an F0 sketch.  Afterwards,
  for every candidate solution, clone the sketch, feed the complete-graph
  "witness" set of that solution (crossing pairs, induced pairs, satisfied
  constraints), and recover the overlap with the stream by
  inclusion-exclusion.
* ``sampler``: run the expander-walk sampler over the element universe and
  estimate every candidate's value as a function mean.

Both enumerate all candidates after the stream, so ``n`` is capped.  Ties are
broken toward the lexicographically smallest indicator/assignment vector
(variable 0 most significant).
"""
from __future__ import annotations

import logging
import math
import warnings
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .f0 import F0Params, F0Sketch
from .hashing import splitmix64
from .sampler import WalkSample, expander_build, walk_sample
from .universe import (
    CapExceeded, CspInstance, Cut, EdgeUniverse, Graph, RejectedInput, crossing_set,
    crossing_size, csp_universe_size, decode_constraint, inside_set,
    satisfied_count, satisfied_set,
)

log = logging.getLogger(__name__)

MAX_N_GRAPH = 24
MAX_N_DENSEST_BRUTE = 20
MAX_CSP_ASSIGNMENTS = 2 ** 24
MAX_CSP_BRUTE = 2 ** 20
MAX_K = 3
# the F0 path streams every satisfied set; bound assignments x |satisfied set|
MAX_CSP_F0_WORK = 2 ** 30
MAX_Q = 3
DEFAULT_WALK_CAP = 200_000


class DensityWarning(UserWarning):
    """The stream is sparser than the density the guarantee assumes."""


@dataclass
class DenseRunConfig:
    eps: float
    alpha: float
    n: int
    variant: str = "f0"
    seed: int = 0
    # F0 variant: override the union sketch's sample capacity
    capacity: int | None = None
    # sampler variant: overrides and the walk-length clamp
    walk_length: int | None = None
    lam: float | None = None
    walk_cap: int = DEFAULT_WALK_CAP
    exhaustive_walk: bool = False
    keep_table: bool = False

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise RejectedInput(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 < self.alpha <= 1:
            raise RejectedInput(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.variant not in ("f0", "sampler"):
            raise RejectedInput(f"unknown variant {self.variant!r}")
        if self.n < 2:
            raise RejectedInput("need at least two vertices/variables")

    def sub_seed(self, i: int) -> int:
        return splitmix64((self.seed << 8) + i) >> 1


@dataclass
class OptResult:
    solution: Any
    estimate: float
    exact: float | None = None
    table: list[tuple[int, float]] | None = None
    params: dict = field(default_factory=dict)


def _lex_bits(idx: int, n: int) -> tuple[int, ...]:
    return tuple((idx >> (n - 1 - i)) & 1 for i in range(n))


def _lex_bits_array(idx: np.ndarray, n: int) -> np.ndarray:
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] >> shifts[None, :]) & 1


def _check_graph_cap(n: int) -> None:
    if n > MAX_N_GRAPH:
        raise CapExceeded(f"n={n} exceeds the enumeration cap {MAX_N_GRAPH}")


def _density_check(m: float, n: int, k: int, alpha: float) -> None:
    if m < alpha * n ** k:
        warnings.warn(f"stream has m~{m:.1f} < alpha*n^{k}={alpha * n ** k:.1f}; "
                      "the approximation guarantee does not apply", DensityWarning,
                      stacklevel=3)


def _walk(cfg: DenseRunConfig, N: int, t: int, lam: float, cap: int, seed: int) -> WalkSample:
    if cfg.walk_length is not None:
        t = cfg.walk_length
    if cfg.lam is not None:
        lam = cfg.lam
    E = expander_build(N, lam)
    if cfg.exhaustive_walk:
        return WalkSample.exhaustive(E, cap=cap)
    if t > cfg.walk_cap:
        log.warning("walk length %d clamped to %d", t, cfg.walk_cap)
        t = cfg.walk_cap
    return walk_sample(E, t, seed, cap)


# ------------------------------------------------------------------ Max-Cut


def maxcut_dense_f0(stream: Iterable[int], cfg: DenseRunConfig) -> OptResult:
    """Stream of encoded edge indices over ``EdgeUniverse(cfg.n)``."""
    n = cfg.n
    _check_graph_cap(n)
    U = EdgeUniverse(n)
    m_sk = F0Sketch(F0Params(cfg.eps / 10, 1 / 9, U.N), seed=cfg.sub_seed(0))
    u_sk = F0Sketch(F0Params(cfg.eps * cfg.alpha / 10, 1 / (9 * 2 ** n), U.N),
                    seed=cfg.sub_seed(1), capacity=cfg.capacity)
    for e in stream:
        m_sk.insert(e)
        u_sk.insert(e)
    m_hat = m_sk.estimate()
    _density_check(m_hat, n, 2, cfg.alpha)

    best, best_val = None, -math.inf
    table = [] if cfg.keep_table else None
    for idx in range(2 ** (n - 1)):
        x = Cut(_lex_bits(idx, n))
        v_hat = m_hat + crossing_size(x) - u_sk.estimate_union(crossing_set(x, U))
        if table is not None:
            table.append((idx, v_hat))
        if v_hat > best_val:
            best, best_val = x, v_hat
    est = best_val / m_hat if m_hat > 0 else 0.0
    return OptResult(best, est, table=table,
                     params={"m_hat": m_hat, "eps_union": u_sk.params.eps_rel,
                             "delta_union": u_sk.params.delta})


def maxcut_dense_sampler(stream: Iterable[int], cfg: DenseRunConfig) -> OptResult:
    """Sampler variant via the Max-CSP(k=q=2) parameters."""
    n = cfg.n
    _check_graph_cap(n)
    U = EdgeUniverse(n)
    eps1 = cfg.eps / 16
    lam = eps1 * cfg.alpha
    t = math.ceil(4 * n / (eps1 ** 2 * cfg.alpha ** 2))
    ws = _walk(cfg, U.N, t, lam, 1, cfg.sub_seed(2))
    ws.insert_all(stream)
    ws.flush()
    m = ws.c_s
    _density_check(m, n, 2, cfg.alpha)
    u, v = U.decode_all()
    idx = np.arange(2 ** (n - 1), dtype=np.int64)
    est = np.empty(len(idx))
    for lo in range(0, len(idx), 4096):
        X = _lex_bits_array(idx[lo:lo + 4096], n)
        vals = (X[:, u] != X[:, v]).astype(np.float64)
        est[lo:lo + 4096] = ws.estimate_many(vals)
    j = int(np.argmax(est))
    return OptResult(Cut(_lex_bits(j, n)), float(est[j]),
                     table=list(zip(idx.tolist(), est.tolist())) if cfg.keep_table else None,
                     params={"t": ws.t, "lam": ws.expander.lam, "m": m})


def maxcut_brute(G: Graph) -> tuple[Cut, float]:
    n = G.n
    _check_graph_cap(n)
    pairs = G.pairs()
    if not pairs:
        return Cut((0,) * n), 0.0
    u = np.array([p[0] for p in pairs])
    v = np.array([p[1] for p in pairs])
    best_idx, best = 0, -1
    total = 2 ** (n - 1)
    for lo in range(0, total, 1 << 16):
        idx = np.arange(lo, min(total, lo + (1 << 16)), dtype=np.int64)
        X = _lex_bits_array(idx, n)
        cnt = (X[:, u] != X[:, v]).sum(axis=1)
        j = int(np.argmax(cnt))
        if cnt[j] > best:
            best, best_idx = int(cnt[j]), int(idx[j])
    return Cut(_lex_bits(best_idx, n)), best / len(pairs)


# ------------------------------------------------------- Densest subgraph


def _subset_sizes_ok(n: int, m: float):
    for idx in range(1, 2 ** n):
        bits = _lex_bits(idx, n)
        if sum(bits) >= m / n:
            yield idx, bits


def densest_dense_f0(stream: Iterable[int], cfg: DenseRunConfig) -> OptResult:
    n = cfg.n
    _check_graph_cap(n)
    U = EdgeUniverse(n)
    sk = F0Sketch(F0Params(cfg.eps * cfg.alpha ** 2 / 4, 1 / (2 * 2 ** n), U.N),
                  seed=cfg.sub_seed(3), capacity=cfg.capacity)
    m = 0
    for e in stream:
        sk.insert(e)
        m += 1
    _density_check(m, n, 2, cfg.alpha)

    best, best_val = None, -math.inf
    table = [] if cfg.keep_table else None
    for idx, bits in _subset_sizes_ok(n, m):
        members = [i for i, b in enumerate(bits) if b]
        s = len(members)
        e_hat = m + s * (s - 1) // 2 - sk.estimate_union(inside_set(members, U))
        d_hat = e_hat / s
        if table is not None:
            table.append((idx, d_hat))
        if d_hat > best_val:
            best, best_val = members, d_hat
    return OptResult(best, best_val, table=table, params={"m": m})


def densest_dense_sampler(stream: Iterable[int], cfg: DenseRunConfig) -> OptResult:
    """Simple graphs only: a repeated edge on a walk vertex is rejected."""
    n = cfg.n
    _check_graph_cap(n)
    U = EdgeUniverse(n)
    eps1 = cfg.eps * cfg.alpha / 16
    lam = eps1 * cfg.alpha
    t = math.ceil(4 * n / (eps1 ** 2 * cfg.alpha ** 2))
    ws = _walk(cfg, U.N, t, lam, 1, cfg.sub_seed(4))
    ws.insert_all(stream)
    ws.flush()
    m = ws.c_s
    _density_check(m, n, 2, cfg.alpha)
    u, v = U.decode_all()
    cands = [(idx, bits) for idx, bits in _subset_sizes_ok(n, m)]
    idx = np.array([c[0] for c in cands], dtype=np.int64)
    sizes = np.array([sum(c[1]) for c in cands], dtype=np.float64)
    est = np.empty(len(idx))
    for lo in range(0, len(idx), 4096):
        X = _lex_bits_array(idx[lo:lo + 4096], n)
        vals = (X[:, u] & X[:, v]).astype(np.float64)
        est[lo:lo + 4096] = ws.estimate_many(vals) * m / sizes[lo:lo + 4096]
    j = int(np.argmax(est))
    members = [i for i, b in enumerate(_lex_bits(int(idx[j]), n)) if b]
    return OptResult(members, float(est[j]),
                     table=list(zip(idx.tolist(), est.tolist())) if cfg.keep_table else None,
                     params={"t": ws.t, "lam": ws.expander.lam, "m": m})


def densest_brute(G: Graph) -> tuple[list[int], float]:
    n = G.n
    if n > MAX_N_DENSEST_BRUTE:
        raise CapExceeded(f"n={n} exceeds the subset-enumeration cap {MAX_N_DENSEST_BRUTE}")
    pairs = G.pairs()
    u = np.array([p[0] for p in pairs], dtype=np.int64)
    v = np.array([p[1] for p in pairs], dtype=np.int64)
    best_idx, best = 1, -1.0
    total = 2 ** n
    for lo in range(1, total, 1 << 16):
        idx = np.arange(lo, min(total, lo + (1 << 16)), dtype=np.int64)
        X = _lex_bits_array(idx, n)
        inside = (X[:, u] & X[:, v]).sum(axis=1) if len(pairs) else np.zeros(len(idx))
        dens = inside / X.sum(axis=1)
        j = int(np.argmax(dens))
        if dens[j] > best:
            best, best_idx = float(dens[j]), int(idx[j])
    members = [i for i, b in enumerate(_lex_bits(best_idx, n)) if b]
    return members, best


def density(G: Graph, members: Iterable[int]) -> float:
    s = set(members)
    if not s:
        raise RejectedInput("density of the empty set")
    return sum(1 for a, b in G.pairs() if a in s and b in s) / len(s)


# ------------------------------------------------------------------ Max-CSP


def _check_csp_caps(n: int, k: int, q: int, limit: int) -> None:
    if k > MAX_K or q > MAX_Q:
        raise CapExceeded(f"k={k}, q={q} exceed caps k<={MAX_K}, q<={MAX_Q}")
    if q ** n > limit:
        raise CapExceeded(f"q^n={q ** n} exceeds the assignment cap {limit}")


def _assignment(idx: int, n: int, q: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        idx, r = divmod(idx, q)
        out.append(r)
    return tuple(reversed(out))


def _assignments_array(idx: np.ndarray, n: int, q: int) -> np.ndarray:
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % q


def csp_dense_f0(stream: Iterable[int], cfg: DenseRunConfig, k: int, q: int) -> OptResult:
    """Stream of encoded constraint codes (see :func:`encode_constraint`)."""
    n = cfg.n
    _check_csp_caps(n, k, q, MAX_CSP_ASSIGNMENTS)
    work = q ** n * satisfied_count(n, k, q)
    if work > MAX_CSP_F0_WORK:
        raise CapExceeded(f"F0 path would stream {work} union elements (cap {MAX_CSP_F0_WORK}); "
                          "use the sampler variant")
    N = csp_universe_size(n, k, q)
    eps1 = cfg.eps * cfg.alpha / (8 * 2 ** (q ** k) * q ** k)
    sk = F0Sketch(F0Params(eps1, 1 / (3 * q ** n), N), seed=cfg.sub_seed(5),
                  capacity=cfg.capacity)
    m = 0
    for c in stream:
        sk.insert(c)
        m += 1
    if m == 0:
        raise RejectedInput("empty constraint stream")
    _density_check(m, n, k, cfg.alpha)
    t_size = satisfied_count(n, k, q)
    best, best_val = None, -math.inf
    table = [] if cfg.keep_table else None
    for idx in range(q ** n):
        x = _assignment(idx, n, q)
        v_hat = m + t_size - sk.estimate_union(satisfied_set(x, n, k, q))
        if table is not None:
            table.append((idx, v_hat / m))
        if v_hat > best_val:
            best, best_val = x, v_hat
    return OptResult(best, best_val / m, table=table, params={"m": m})


def _support_tables(codes: np.ndarray, n: int, k: int, q: int):
    cons = [decode_constraint(int(c), n, k, q) for c in codes]
    V = np.array([c.vars for c in cons], dtype=np.int64).reshape(len(cons), k)
    T = np.array([c.table for c in cons], dtype=np.int64).reshape(len(cons), q ** k)
    return V, T


def csp_dense_sampler(stream: Iterable[int], cfg: DenseRunConfig, k: int, q: int) -> OptResult:
    n = cfg.n
    _check_csp_caps(n, k, q, MAX_CSP_ASSIGNMENTS)
    work = q ** n * satisfied_count(n, k, q)
    if work > MAX_CSP_F0_WORK:
        raise CapExceeded(f"F0 path would stream {work} union elements (cap {MAX_CSP_F0_WORK}); "
                          "use the sampler variant")
    N = csp_universe_size(n, k, q)
    eps1 = cfg.eps / (4 * q ** k)
    lam = eps1 * cfg.alpha
    t = math.ceil(4 * n / (eps1 ** 2 * cfg.alpha ** 2))
    ws = _walk(cfg, N, t, lam, 1, cfg.sub_seed(6))
    ws.insert_all(stream)
    ws.flush()
    _density_check(ws.c_s, n, k, cfg.alpha)
    sig = ws.sigma()
    scale = ws.scale()
    codes = np.fromiter(sig.keys(), dtype=np.int64)
    w = np.fromiter(sig.values(), dtype=np.float64)
    V, T = _support_tables(codes, n, k, q)
    powers = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
    total = q ** n
    est = np.empty(total)
    rows = np.arange(len(codes))
    for lo in range(0, total, 4096):
        X = _assignments_array(np.arange(lo, min(total, lo + 4096), dtype=np.int64), n, q)
        if len(codes) == 0:
            est[lo:lo + len(X)] = 0.0
            continue
        ti = (X[:, V] * powers).sum(axis=2)  # (assignments, support)
        sat = T[rows[None, :], ti]
        est[lo:lo + len(X)] = scale * (sat @ w)
    j = int(np.argmax(est))
    return OptResult(_assignment(j, n, q), float(est[j]),
                     table=list(enumerate(est.tolist())) if cfg.keep_table else None,
                     params={"t": ws.t, "lam": ws.expander.lam, "m": ws.c_s})


def csp_brute(phi: CspInstance) -> tuple[tuple[int, ...], float]:
    n, k, q = phi.n, phi.k, phi.q
    _check_csp_caps(n, k, q, MAX_CSP_BRUTE)
    if not phi.constraints:
        raise RejectedInput("empty CSP instance")
    V = np.array([c.vars for c in phi.constraints], dtype=np.int64)
    T = np.array([c.table for c in phi.constraints], dtype=np.int64)
    powers = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
    rows = np.arange(len(V))
    best_idx, best = 0, -1
    total = q ** n
    for lo in range(0, total, 1 << 14):
        X = _assignments_array(np.arange(lo, min(total, lo + (1 << 14)), dtype=np.int64), n, q)
        ti = (X[:, V] * powers).sum(axis=2)
        cnt = T[rows[None, :], ti].sum(axis=1)
        j = int(np.argmax(cnt))
        if cnt[j] > best:
            best, best_idx = int(cnt[j]), lo + j
    return _assignment(best_idx, n, q), best / len(V)
