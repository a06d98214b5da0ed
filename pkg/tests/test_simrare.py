import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from densketch.hashing import next_prime, sample_perm_hash
from densketch.simrare import (
    RareWindow, SimWindow, chebyshev_window_size, jaccard, rarity, rarity_perm,
    similarity_f0, similarity_perm, similarity_perm_tagged, window_size,
)
from densketch.universe import RejectedInput, UndefinedValue


def test_window_sizes():
    # delta = eps/3 = 0.05 -> 1/(10 * 0.0025 * 0.4) = 100
    assert window_size(0.15, 0.4) == 100
    assert chebyshev_window_size(0.15, 0.4) == 10_000


def test_similarity_f0_examples():
    assert similarity_f0([1, 2, 3], [1, 2, 3], 0.2, 10) == 1
    assert similarity_f0([1, 2], [3, 4], 0.2, 10) == 0
    assert similarity_f0([1, 2, 3], [2, 3, 4], 0.2, 10) == 0.5
    with pytest.raises(UndefinedValue):
        similarity_f0([], [], 0.2, 10)


def test_similarity_perm_full_window_examples():
    p = next_prime(50)
    assert similarity_perm([1, 2, 3], [2, 3, 4], 0.2, 0.5, 50, seed=1, t=p) == 0.5
    A = random.Random(0).sample(range(50), 20)
    assert similarity_perm(A, A[::-1], 0.2, 0.5, 50, seed=3) == 1


def test_similarity_perm_small_window_identical_sets():
    A = list(range(0, 1000, 3))
    for s in range(20):
        try:
            assert similarity_perm(A, A, 0.3, 0.3, 1000, seed=s) == 1
        except UndefinedValue:
            pass


@settings(max_examples=40, deadline=None)
@given(st.sets(st.integers(0, 300)), st.sets(st.integers(0, 300)), st.integers(0, 10 ** 6))
def test_full_window_exact(A, B, seed):
    p = next_prime(301)
    if not A | B:
        with pytest.raises(UndefinedValue):
            similarity_perm(A, B, 0.1, 0.5, 301, seed=seed, t=p)
        return
    assert similarity_perm(A, B, 0.1, 0.5, 301, seed=seed, t=p) == pytest.approx(jaccard(A, B))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 200), min_size=1, max_size=300), st.integers(1, 5),
       st.integers(0, 10 ** 6))
def test_rarity_full_window_exact(stream, k, seed):
    got = rarity_perm(stream, k, 0.1, 0.5, 201, seed=seed, t=next_prime(201))
    assert got == pytest.approx(rarity(stream, k))


def test_rarity_examples():
    p = next_prime(10)
    assert rarity_perm([1, 1, 2, 3, 3, 3], 2, 0.1, 0.5, 10, seed=0, t=p) == pytest.approx(1 / 3)
    assert rarity_perm([1, 1, 2, 3, 3, 3], 9, 0.1, 0.5, 10, seed=0, t=p) == 0
    assert rarity([1, 1, 2, 3, 3, 3], 2) == pytest.approx(1 / 3)
    with pytest.raises(RejectedInput):
        rarity_perm([1], 0, 0.1, 0.5, 10)


def test_rarity_saturation():
    h = sample_perm_hash(11, 2)
    win = RareWindow(h, 11, 3)
    for _ in range(8):
        win.insert(5)
    for _ in range(3):
        win.insert(6)
    assert win.a.max() == 4
    assert win.counts() == (1, 2)


def test_window_insert_errors():
    h = sample_perm_hash(11, 2)
    w = SimWindow(h, 5)
    with pytest.raises(RejectedInput):
        w.insert("c", 1)
    with pytest.raises(RejectedInput):
        w.insert("a", 11)
    with pytest.raises(UndefinedValue):
        w.estimate()
    with pytest.raises(UndefinedValue):
        RareWindow(h, 5, 2).estimate()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("ab"), st.integers(0, 500)), min_size=1, max_size=200),
       st.integers(0, 10 ** 6))
def test_interleaving_and_duplicates_do_not_matter(records, seed):
    shuffled = records + records[: len(records) // 2]
    random.Random(seed).shuffle(shuffled)
    try:
        a = similarity_perm_tagged(records, 0.2, 0.5, 501, seed=seed, t=60)
    except UndefinedValue:
        return
    assert similarity_perm_tagged(shuffled, 0.2, 0.5, 501, seed=seed, t=60) == a


def planted_sets(N, union, J, rng):
    U = rng.choice(N, union, replace=False)
    inter = int(round(J * union))
    rest = union - inter
    I, R = U[:inter], U[inter:]
    return np.concatenate([I, R[: rest // 2]]), np.concatenate([I, R[rest // 2:]])


def test_similarity_perm_monte_carlo():
    rng = np.random.default_rng(0)
    A, B = planted_sets(10007, 5000, 0.4, rng)
    J = jaccard(A.tolist(), B.tolist())
    ok = 0
    for s in range(200):
        ok += abs(similarity_perm(A.tolist(), B.tolist(), 0.15, 0.4, 10007, seed=s) - J) <= 0.15
    assert ok >= 134


def test_chebyshev_event_at_bound_window():
    # large universe so the corrected window stays well inside [0, p)
    N = 100_003
    p = next_prime(N)
    rng = np.random.default_rng(1)
    U = rng.choice(N, 40_000, replace=False)
    inter = U[:16_000]
    eps, alpha = 0.15, 0.4
    delta = eps / 3
    t = chebyshev_window_size(eps, alpha)
    assert t < p / 5
    bad = 0
    for s in range(200):
        h = sample_perm_hash(p, s)
        x_cap = int((h.many(inter) < t).sum())
        e_cap, e_cup = t * len(inter) / p, t * len(U) / p
        bad += abs(x_cap - e_cap) >= delta * e_cup
    assert bad / 200 <= 0.2


def test_chebyshev_event_at_algorithm_window_is_not_bounded():
    """Documents that the stated window does not give the 1/10 per-event bound."""
    N = 10007
    p = next_prime(N)
    rng = np.random.default_rng(2)
    U = rng.choice(N, 5000, replace=False)
    inter = U[:2000]
    t = window_size(0.15, 0.4)
    delta = 0.05
    bad = 0
    for s in range(200):
        h = sample_perm_hash(p, s)
        bad += abs(int((h.many(inter) < t).sum()) - t * 2000 / p) >= delta * t * 5000 / p
    assert bad / 200 > 0.2


def test_rarity_monte_carlo():
    rng = np.random.default_rng(3)
    N = 10007
    elems = rng.choice(N, 4000, replace=False)
    mult = rng.integers(1, 6, 4000)
    stream = np.repeat(elems, mult)
    rng.shuffle(stream)
    stream = stream.tolist()
    R = rarity(stream, 3)
    ok = sum(abs(rarity_perm(stream, 3, 0.15, 0.4, N, seed=s) - R) <= 0.15 for s in range(60))
    assert ok >= 40


def test_similarity_f0_monte_carlo_sampling_mode():
    rng = np.random.default_rng(4)
    A, B = planted_sets(10 ** 6, 20_000, 0.4, rng)
    J = jaccard(A.tolist(), B.tolist())
    ok = sum(abs(similarity_f0(A.tolist(), B.tolist(), 0.15, 10 ** 6, seed=s) - J) <= 0.15
             for s in range(60))
    assert ok >= 40
