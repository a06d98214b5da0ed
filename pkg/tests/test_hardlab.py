import itertools
import math
import random
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from densketch import hardlab as hl
from densketch.universe import Cut, RejectedInput, cut_value

from oracles import hamming, weighted_maxcut


def rand_x(n, seed):
    return np.random.default_rng(seed).choice((-1, 1), n)


def naive_disc(G, x, v):
    total = 0
    for u in range(G.nL):
        total += x[u] * sum(1 for e in G.edges if e == (u, v))
    return total


# -------------------------------------------------------------- conditional


def test_disc_examples():
    G = hl.BipartiteInstance(2, 1, [(0, 0)])
    assert hl.disc(G, [1, 1], 0) == 1
    G = hl.BipartiteInstance(2, 1, [(0, 0), (1, 0)])
    assert hl.disc(G, [1, -1], 0) == 0
    with pytest.raises(RejectedInput):
        hl.disc(G, [1, -1], 1)
    with pytest.raises(RejectedInput):
        hl.BipartiteInstance(2, 1, [(2, 0)])


def test_disc_matches_naive_recount():
    for s in range(20):
        G = hl.grr_sample(9, 3, s)
        x = rand_x(9, s)
        d = hl.discs(G, x)
        assert all(d[v] == naive_disc(G, x, v) == hl.disc(G, x, v) for v in range(9))


def test_loss_examples():
    G = hl.grr_sample(8, 3, 1)
    x = rand_x(8, 1)
    assert hl.closs(G, x, hl.optimal_right(G, x)) == 0
    G = hl.BipartiteInstance(3, 2, [(0, 0), (1, 0), (2, 1)])
    x = [1, 1, 1]
    assert hl.closs(G, x, [1, 1]) == float(np.abs(hl.discs(G, x)).sum())


def test_value_is_edge_sum():
    for s in range(10):
        G = hl.grr_sample(7, 3, s)
        x, y = rand_x(7, s), rand_x(7, s + 99)
        direct = sum(1 - x[u] * y[v] for u, v in G.edges) / 2
        assert hl.cval(G, x, y) == direct
        assert hl.copt(G, x) - hl.cval(G, x, y) == hl.closs(G, x, y) >= 0


def test_copt_brute_equivalence():
    for s in range(40):
        n, k = random.Random(s).randint(4, 12), random.Random(s).randint(1, 4)
        G = hl.grr_sample(n, min(k, n), s)
        x = rand_x(n, s)
        assert hl.copt(G, x) == hl.copt_brute(G, x)


# --------------------------------------------------------------- slack


def test_slack_examples():
    assert hl.slack(3, 5) == 0
    assert all(hl.slack(0, b) == 0 for b in range(-5, 6))
    assert hl.slack(3, -2) == 4


def test_slack_identity_small_exhaustive():
    for a in range(-30, 31):
        for b in range(-30, 31):
            assert hl.slack(a, b) + hl.slack(a, -b) == 2 * min(abs(a), abs(b))
            assert hl.slack(a, b) >= 0


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(-10 ** 6, 10 ** 6),
       st.integers(-10 ** 6, 10 ** 6), st.integers(-10 ** 6, 10 ** 6))
def test_slack_lipschitz(a, b, a2, b2):
    assert abs(hl.slack(a2, b2) - hl.slack(a, b)) <= 2 * (abs(a - a2) + abs(b - b2))


def test_advantage_is_slack_of_discs():
    G1, G2 = hl.grr_sample(8, 3, 1), hl.grr_sample(8, 3, 2)
    x = rand_x(8, 3)
    for v in range(8):
        assert hl.advantage(G1, G2, x, v) == hl.slack(hl.disc(G1, x, v), hl.disc(G2, x, v))


# ------------------------------------------------------------ shared good


def test_shared_good_identical_graphs():
    G = hl.grr_sample(10, 3, 4)
    x = rand_x(10, 4)
    r = hl.check_shared_good(G, G, x, 0)
    assert r.exists and hl.closs(G, x, r.witness) == 0


def test_shared_good_large_advantage_blocks():
    # every right vertex sees +2 in G1 and -2 in G2, so advantage 4 each
    G1 = hl.BipartiteInstance(4, 4, [(u, v) for u in (0, 1) for v in range(4)])
    G2 = hl.BipartiteInstance(4, 4, [(u, v) for u in (2, 3) for v in range(4)])
    x = [1, 1, -1, -1]
    assert hl.total_advantage(G1, G2, x) == 16
    assert not hl.check_shared_good(G1, G2, x, 3).exists
    assert hl.check_shared_good(G1, G2, x, 4).exists


def test_shared_good_matches_brute():
    rng = random.Random(0)
    for s in range(60):
        G1, G2 = hl.grr_sample(10, 3, 2 * s), hl.grr_sample(10, 3, 2 * s + 1)
        x = rand_x(10, s)
        tau = rng.choice([0, 0.5, 1, 2, 3, 5])
        r = hl.check_shared_good(G1, G2, x, tau)
        exists, best = hl.shared_good_brute(G1, G2, x, tau)
        assert r.exists == exists
        assert r.min_total_loss == best
        if r.exists:
            assert hl.closs(G1, x, r.witness) <= tau and hl.closs(G2, x, r.witness) <= tau
            assert r.total_advantage <= 4 * tau


# ------------------------------------------------------------ hard family


def test_grr_is_right_regular():
    for s in range(10):
        G = hl.grr_sample(30, 5, s)
        assert G.is_right_regular(5)
        assert all(len(set(nb)) == 5 for nb in G.right_neighbors())
    with pytest.raises(RejectedInput):
        hl.grr_sample(3, 4, 0)


def test_grr_degree_square_mean():
    vals = [int((hl.grr_sample(200, 4, s).left_degrees() ** 2).sum()) for s in range(100)]
    assert np.mean(vals) <= 1.1 * 200 * (4 + 16)


def test_grr_overlap_mean():
    vals = [hl.overlap(hl.grr_sample(200, 4, 2 * s), hl.grr_sample(200, 4, 2 * s + 1))
            for s in range(200)]
    assert abs(np.mean(vals) - 16) <= 0.2 * 16


def test_hard_family_filter():
    params = hl.HardFamilyParams(n=40, k=3, eta_near=0.1, eta_tail=0.5)
    cands = [hl.grr_sample(40, 3, s) for s in range(12)]
    cands.append(hl.BipartiteInstance(40, 40, [(0, v) for v in range(40)]))
    cands.append(cands[0])
    fam, stats = hl.hard_family_filter(cands, params)
    assert stats["not_regular"] >= 1
    assert stats["overlap_pairs"] >= 1
    assert stats["survivors"] == len(fam) <= 13
    for G1, G2 in itertools.combinations(fam, 2):
        assert hl.overlap(G1, G2) <= params.eta_near * 40 * 3
    for G in fam:
        assert (G.left_degrees() ** 2).sum() <= params.C_deg * 40 * 9


def test_hard_family_params():
    p = hl.HardFamilyParams(n=2000, k=16)
    assert p.tau == pytest.approx(2000 * 4 / 2000)
    assert p.in_regime
    with pytest.raises(RejectedInput):
        hl.HardFamilyParams(n=10, k=0)


@pytest.mark.parametrize("m", [16, 64, 256])
def test_rademacher_floor(m):
    assert hl.rademacher_min_mean(m, 10_000, m) >= hl.RADEMACHER_FLOOR * math.sqrt(m)


def test_separation_rate_bounds():
    G = hl.grr_sample(8, 2, 0)
    assert hl.separation_rate(G, G, 0, 10, 0) == 1.0


# ------------------------------------------------------------------ gadgets


def test_gadget_cond_shape():
    G = hl.grr_sample(6, 2, 0)
    params = hl.HardFamilyParams(6, 2)
    x = rand_x(6, 0)
    W = hl.gadget_cond(G, x, params)
    base = hl.bipartite_as_weighted(G)
    assert len(W.edges) == len(base.edges) + 6 + 1
    sink = [e for e in W.edges if e[0] >= 12]
    assert sink == [(12, 13, 10 ** 5 * 6 * 2)]
    for u in range(6):
        target = 13 if x[u] == 1 else 12
        assert (u, target, 4) in W.edges


def test_weighted_brute_examples():
    assert hl.weighted_maxcut_brute(hl.WeightedGraph(2, [(0, 1, 7)]))[1] == 7
    tri = hl.WeightedGraph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    assert hl.weighted_maxcut_brute(tri)[1] == 2
    with pytest.raises(RejectedInput):
        hl.WeightedGraph(2, [(0, 1, 0)])
    with pytest.raises(RejectedInput):
        hl.weighted_maxcut_brute(hl.WeightedGraph(23, []))


def test_weighted_brute_vs_recounts():
    rng = random.Random(1)
    for _ in range(15):
        nv = rng.randint(2, 9)
        edges = [(u, v, rng.randint(1, 50)) for u, v in itertools.combinations(range(nv), 2)
                 if rng.random() < 0.5]
        W = hl.WeightedGraph(nv, edges)
        cut, val = hl.weighted_maxcut_brute(W)
        assert val == hl.weighted_maxcut_recount(W) == weighted_maxcut(nv, edges)
        assert hl.cut_weight(W, cut) == val and cut[0] == 0


def regular_graphs():
    out = []
    for N, k, s in [(4, 3, 0), (6, 3, 1), (8, 3, 2), (6, 2, 3), (8, 2, 4), (5, 2, 5), (8, 1, 6)]:
        G = nx.random_regular_graph(k, N, seed=s)
        out.append(hl.WeightedGraph(N, [(u, v, 1) for u, v in G.edges()]))
    for s in range(3):
        out.append(hl.bipartite_as_weighted(hl.matching_union_sample(4, 2, s)))
    return out


def test_gadget_det_identity():
    for A in regular_graphs():
        for s in range(4):
            x = rand_x(A.n, s)
            W = hl.gadget_det(A, x)
            z, opt = hl.weighted_maxcut_brute(W)
            assert opt == hl.gadget_det_prediction(A, x)
            # witness: sinks split and every vertex on the side of s_{x}
            sp = z[A.n]
            assert z[A.n + 1] != sp
            assert all((z[w] == sp) == (x[w] == 1) for w in range(A.n))


def test_gadget_det_rejects_irregular():
    with pytest.raises(RejectedInput):
        hl.gadget_det(hl.WeightedGraph(3, [(0, 1, 1)]), [1, 1, 1])


def test_cond_experiment_runs():
    G = hl.grr_sample(5, 2, 0)
    st_ = hl.cond_to_plain_experiment(G, rand_x(5, 0), 0.001, hl.HardFamilyParams(5, 2))
    assert st_["near_optimal"] >= 1 and 0 <= st_["rate"] <= 1


# -------------------------------------------------------------- bipartite


def test_bip_examples():
    assert hl.bip_cut_value_formula({0, 1}, {0, 1}, 4) == 1
    assert hl.bip_cut_value_formula({0, 1}, {2, 3}, 4) == 1
    assert hl.bip_cut_value_formula({0, 1}, {0, 2}, 4) == Fraction(1, 2)
    for bad in (set(), {0, 1, 2, 3}):
        with pytest.raises(RejectedInput):
            hl.bip_instance(bad, 4)


def test_bip_formula_matches_cut_value_small():
    for n in range(2, 7):
        for r in range(1, n):
            for S in itertools.combinations(range(n), r):
                G = hl.bip_instance(S, n)
                for mask in range(2 ** n):
                    T = {i for i in range(n) if (mask >> i) & 1}
                    want = Fraction(sum(1 for u, v in G.pairs() if (u in T) != (v in T)),
                                    G.m_distinct)
                    assert hl.bip_cut_value_formula(S, T, n) == want
                    assert cut_value(G, Cut.from_set(T, n)) == pytest.approx(float(want))


# ---------------------------------------------------------------- Hamming


def test_entropy_examples():
    assert hl.binary_entropy(0.5) == 1
    assert hl.binary_entropy(0) == 0
    assert hl.ball_size(20, 2) == 211
    assert math.log2(211) <= 20 * hl.binary_entropy(0.1)
    assert 20 * hl.binary_entropy(0.1) == pytest.approx(9.38, abs=0.01)


def test_entropy_bound_grid():
    for n in range(1, 31):
        for i in range(0, n // 2 + 1):
            assert hl.entropy_bound_holds(n, i / n)
        assert hl.entropy_bound_holds(n, 0.49)


def test_hamming_family_disjoint():
    fam, stats = hl.hamming_family(16, 0.1, 300, seed=2)
    assert stats["survivors"] == len(fam) > 1
    r = math.floor(0.1 * 16)
    for a, b in itertools.combinations(fam, 2):
        d = hamming(a, b)
        assert 2 * r < d < 16 - 2 * r
        assert 1 / 3 <= a.mean() <= 2 / 3
    with pytest.raises(RejectedInput):
        hl.hamming_family(10, 0.5, 3)


def test_ball_collision_rule_vs_enumeration():
    # balls around {x, not x} and {y, not y} meet iff the distance rule fires
    n, delta = 8, 0.2
    r = math.floor(delta * n)
    rng = np.random.default_rng(0)
    for _ in range(40):
        x, y = rng.integers(0, 2, n), rng.integers(0, 2, n)
        ball = lambda c: {z for z in itertools.product((0, 1), repeat=n)
                          if hamming(z, c) <= r}
        bx = ball(x) | ball(1 - x)
        by = ball(y) | ball(1 - y)
        assert bool(bx & by) == hl.balls_collide(x, y, delta)


# -------------------------------------------------------------- value gap


def test_matching_union_degrees():
    M = hl.matching_union_sample(6, 1, 0)
    assert (M.left_degrees() == 1).all() and (M.right_degrees() == 1).all()
    for s in range(10):
        M = hl.matching_union_sample(12, 4, s)
        assert (M.left_degrees() == 4).all() and (M.right_degrees() == 4).all()


def test_matching_union_overlap_mean():
    vals = [hl.overlap(hl.matching_union_sample(50, 4, 2 * s),
                       hl.matching_union_sample(50, 4, 2 * s + 1)) for s in range(300)]
    assert abs(np.mean(vals) - 16) <= 0.2 * 16


def test_value_gap_identical():
    A = hl.matching_union_sample(8, 3, 0)
    r = hl.value_gap_experiment(A, A, 0)
    assert r.gap == 0 and r.m == 0


def test_value_gap_two_matchings_exhaustive():
    A1 = hl.BipartiteInstance(4, 4, [(i, i) for i in range(4)])
    A2 = hl.BipartiteInstance(4, 4, [(i, (i + 1) % 4) for i in range(4)])
    B = hl.signed_matrix(A1, A2)
    assert np.abs(B).sum() == 8
    best = 0
    for y in itertools.product((-1, 1), repeat=4):
        By = B @ np.array(y)
        x = np.where(By >= 0, 1, -1)
        best = max(best, abs(int(x @ By)) / 2)
    r = hl.value_gap_experiment(A1, A2, 0, restarts=64)
    assert r.gap == best == 4
    assert r.identity_holds


def test_value_gap_is_cut_difference():
    A1, A2 = hl.matching_union_sample(10, 3, 1), hl.matching_union_sample(10, 3, 2)
    r = hl.value_gap_experiment(A1, A2, 5)
    # x on L with +1 on side 0; y on R with +1 on side 1, so disagreement = cut edge
    diff = hl.bipartite_cut_weight(A1, r.x, -r.y) - hl.bipartite_cut_weight(A2, r.x, -r.y)
    assert abs(diff) == r.gap


def test_value_gap_rejects_irregular():
    A1 = hl.BipartiteInstance(3, 3, [(0, 0), (1, 1), (2, 2)])
    A2 = hl.BipartiteInstance(3, 3, [(0, 0), (0, 1), (2, 2)])
    with pytest.raises(RejectedInput):
        hl.value_gap_experiment(A1, A2, 0)
