import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given

from align_lab.bounds import margin_converse
from align_lab.errors import NTooSmall, ZeroPairProbability
from align_lab.experiments import mc_alignment_success, mc_equiv_frequencies
from align_lab.indist import (
    EquivStats,
    batch_equiv_stats,
    chebyshev_p_x_zero,
    count_indistinguishable,
    indistinguishable_pairs,
    map_success_upper,
    p_equiv_pair,
    p_equiv_triple,
    p_equiv_two_pairs,
    p_equiv_two_pairs_as_printed,
)
from align_lab.model import AttributedGraph, ModelParams, intersection, sample_pair, validate
from align_lab.oracles import brute_equiv_probs
from strategies import graphs, random_graph


def model(n, m, p11, q11):
    p = [[p11, (1 - p11) / 3], [(1 - p11) / 3, (1 - p11) / 3]]
    q = [[q11, (1 - q11) / 3], [(1 - q11) / 3, (1 - q11) / 3]]
    return ModelParams(n, m, validate(p), validate(q))


def naive_equiv(g):
    u, a = g.user_adj, g.attr_adj
    n = g.n
    eq = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rows = all(u[i, v] == u[j, v] for v in range(n) if v not in (i, j))
            eq[i, j] = rows and all(a[i, b] == a[j, b] for b in range(g.m))
    return eq


def naive_stats(g):
    eq = naive_equiv(g)
    n = g.n
    pairs = [(i, j) for i, j in itertools.combinations(range(n), 2) if eq[i, j]]
    triples = sum(
        1 for i, j, k in itertools.combinations(range(n), 3) if eq[i, j] and eq[j, k] and eq[i, k]
    )
    disjoint = sum(1 for e, f in itertools.combinations(pairs, 2) if not set(e) & set(f))
    return EquivStats(len(pairs), triples, disjoint)


def test_count_examples():
    assert count_indistinguishable(AttributedGraph.empty(4, 0)).x_count == 6
    assert count_indistinguishable(AttributedGraph.complete(4, 0)).x_count == 6
    star = AttributedGraph.from_edges(4, 0, [(0, 1), (0, 2), (0, 3)])
    s = count_indistinguishable(star)
    assert s.x_count == 3
    assert indistinguishable_pairs(star) == [(1, 2), (1, 3), (2, 3)]
    assert s.triple_count == 1 and s.two_disjoint_pair_count == 0


def test_count_empty_graph_structure():
    s = count_indistinguishable(AttributedGraph.empty(6, 2))
    assert s == EquivStats(15, 20, 45)


@given(graphs(max_n=7, max_m=3))
def test_count_matches_naive_loop(g):
    s = count_indistinguishable(g)
    assert s == naive_stats(g)
    assert 0 <= s.x_count <= math.comb(g.n, 2)


def test_batch_matches_single(rng):
    gs = [random_graph(rng, 7, 3, 0.5) for _ in range(40)]
    user = np.stack([g.user_adj for g in gs])
    attr = np.stack([g.attr_adj for g in gs])
    out = batch_equiv_stats(user, attr)
    for g, row in zip(gs, out):
        s = count_indistinguishable(g)
        assert tuple(row) == (s.x_count, s.triple_count, s.two_disjoint_pair_count)


def test_equiv_stats_json():
    s = EquivStats(3, 1, 0)
    assert json.loads(json.dumps(s.to_dict())) == {"x_count": 3, "triple_count": 1, "two_disjoint_pair_count": 0}


@given(graphs(min_n=2, max_n=7, max_m=3))
def test_swap_is_automorphism(g):
    for i, j in indistinguishable_pairs(g):
        perm = np.arange(g.n)
        perm[i], perm[j] = j, i
        swapped_u = g.user_adj[np.ix_(perm, perm)]
        swapped_a = g.attr_adj[perm]
        assert set(map(tuple, np.argwhere(np.triu(swapped_u, 1)))) == set(map(tuple, np.argwhere(np.triu(g.user_adj, 1))))
        assert np.array_equal(swapped_a, g.attr_adj)


def test_swap_automorphism_on_sampled_intersections():
    P = model(7, 2, 0.2, 0.2)
    for s in range(50):
        h = intersection(sample_pair(P, s))
        for i, j in indistinguishable_pairs(h):
            perm = np.arange(7)
            perm[i], perm[j] = j, i
            assert np.array_equal(h.user_adj[np.ix_(perm, perm)], h.user_adj)
            assert np.array_equal(h.attr_adj[perm], h.attr_adj)


# ---------------------------------------------------------------------------
# closed forms


def test_closed_form_examples():
    assert p_equiv_pair(6, 2, 0.0, 0.0) == 1.0
    assert p_equiv_pair(3, 1, 0.5, 0.5) == pytest.approx(0.25)
    assert p_equiv_triple(6, 2, 0.0, 0.0) == 1.0
    assert p_equiv_triple(3, 0, 0.5, 0.0) == pytest.approx(0.25)
    assert p_equiv_two_pairs(6, 2, 0.0, 0.0) == 1.0
    # four cross pairs that must agree: 2·(1/2)^4
    assert p_equiv_two_pairs(4, 0, 0.5, 0.0) == pytest.approx(0.125)
    assert p_equiv_two_pairs_as_printed(4, 0, 0.5, 0.0) == pytest.approx(0.0625)


def test_closed_form_errors():
    with pytest.raises(NTooSmall):
        p_equiv_two_pairs(3, 0, 0.1, 0.1)
    with pytest.raises(NTooSmall):
        p_equiv_triple(2, 0, 0.1, 0.1)
    with pytest.raises(NTooSmall):
        p_equiv_pair(1, 0, 0.1, 0.1)


@pytest.mark.parametrize("n,m,p11,q11", [(4, 0, 0.5, 0.0), (4, 1, 0.3, 0.6), (5, 1, 0.2, 0.4), (4, 2, 0.7, 0.1)])
def test_closed_forms_match_enumeration(n, m, p11, q11):
    b1, b3, b22 = brute_equiv_probs(n, m, p11, q11)
    assert p_equiv_pair(n, m, p11, q11) == pytest.approx(b1, abs=1e-12)
    assert p_equiv_triple(n, m, p11, q11) == pytest.approx(b3, abs=1e-12)
    assert p_equiv_two_pairs(n, m, p11, q11) == pytest.approx(b22, abs=1e-12)


def test_printed_two_pairs_disagrees_with_enumeration():
    _, _, b22 = brute_equiv_probs(4, 0, 0.5, 0.0)
    assert abs(p_equiv_two_pairs_as_printed(4, 0, 0.5, 0.0) - b22) > 0.05


def _assert_close(est, se, exact, k=4):
    assert abs(est - exact) <= k * se, (est, se, exact)


def test_pair_frequency_example():
    f = mc_equiv_frequencies(model(5, 3, 0.3, 0.2), 100_000, seed=11)
    _assert_close(f.pair, f.pair_se, p_equiv_pair(5, 3, 0.3, 0.2))


GRID = [(n, m, p, q) for (n, m) in [(5, 1), (6, 2), (8, 3)] for (p, q) in [(0.1, 0.3)]] + [
    (6, 1, p, q) for p, q in [(0.2, 0.2), (0.4, 0.1), (0.05, 0.5)]
] + [(7, 2, p, q) for p, q in [(0.3, 0.2), (0.15, 0.35), (0.5, 0.05)]]


@pytest.mark.parametrize("n,m,p11,q11", GRID)
def test_closed_forms_match_monte_carlo(n, m, p11, q11):
    f = mc_equiv_frequencies(model(n, m, p11, q11), 100_000, seed=n * 100 + m)
    _assert_close(f.pair, f.pair_se, p_equiv_pair(n, m, p11, q11))
    _assert_close(f.triple, f.triple_se, p_equiv_triple(n, m, p11, q11))
    _assert_close(f.two_pairs, f.two_pairs_se, p_equiv_two_pairs(n, m, p11, q11))


def test_printed_two_pairs_rejected_by_monte_carlo():
    f = mc_equiv_frequencies(model(4, 0, 0.5, 0.0), 100_000, seed=3)
    printed = p_equiv_two_pairs_as_printed(4, 0, 0.5, 0.0)
    assert abs(f.two_pairs - printed) > 10 * f.two_pairs_se
    _assert_close(f.two_pairs, f.two_pairs_se, p_equiv_two_pairs(4, 0, 0.5, 0.0))


# ---------------------------------------------------------------------------
# Chebyshev bound and MAP caps


def test_chebyshev_zero_case():
    assert chebyshev_p_x_zero(10, 3, 0.0, 0.0) == 0.0


def test_chebyshev_reassembly_n10():
    n, m, p11, q11 = 10, 0, 0.05, 0.0
    p1, p3, p22 = p_equiv_pair(n, m, p11, q11), p_equiv_triple(n, m, p11, q11), p_equiv_two_pairs(n, m, p11, q11)
    pairs = list(itertools.combinations(range(n), 2))
    ex = len(pairs) * p1
    ex2 = 0.0
    for e in pairs:
        for f in pairs:
            shared = len(set(e) & set(f))
            ex2 += p1 if shared == 2 else p3 if shared == 1 else p22
    expected = min(1.0, max(0.0, (ex2 - ex * ex) / ex ** 2))
    assert chebyshev_p_x_zero(n, m, p11, q11) == pytest.approx(expected, rel=1e-10, abs=1e-14)


def test_chebyshev_reassembly_unclamped():
    n, m, p11, q11 = 30, 0, 0.02, 0.0
    p1, p3, p22 = p_equiv_pair(n, m, p11, q11), p_equiv_triple(n, m, p11, q11), p_equiv_two_pairs(n, m, p11, q11)
    c2 = math.comb(n, 2)
    ex = c2 * p1
    ex2 = c2 * p1 + c2 * 2 * (n - 2) * p3 + c2 * math.comb(n - 2, 2) * p22
    val = (ex2 - ex * ex) / ex ** 2
    assert 0 < val < 1
    assert chebyshev_p_x_zero(n, m, p11, q11) == pytest.approx(val, rel=1e-10)


def test_chebyshev_dominates_empirical():
    n, m, p11, q11 = 8, 2, 0.3, 0.3
    f = mc_equiv_frequencies(model(n, m, p11, q11), 100_000, seed=8)
    se = math.sqrt(f.x_zero * (1 - f.x_zero) / f.trials)
    assert chebyshev_p_x_zero(n, m, p11, q11) >= f.x_zero - 3 * se


def test_chebyshev_errors():
    # every factor is at least 1/2, so P(i ≡ j) only vanishes by underflow
    with pytest.raises(ZeroPairProbability):
        chebyshev_p_x_zero(3000, 0, 0.5, 0.0)
    with pytest.raises(NTooSmall):
        chebyshev_p_x_zero(3, 0, 0.1, 0.1)


def test_map_success_upper_examples():
    assert map_success_upper(x_count=0) == 1.0
    assert map_success_upper(x_count=1) == 0.5
    assert map_success_upper(p_x_zero=0.0) == 0.5
    assert map_success_upper(p_x_zero=1.0) == 1.0
    with pytest.raises(ValueError):
        map_success_upper()
    with pytest.raises(ValueError):
        map_success_upper(x_count=-1)


def sparse_model(n, m, p11, q11, cross=0.01):
    p = [[p11, cross], [cross, 1 - p11 - 2 * cross]]
    q = [[q11, cross], [cross, 1 - q11 - 2 * cross]]
    return ModelParams(n, m, validate(p), validate(q))


@pytest.mark.parametrize("n,m,p11,q11", [(7, 1, 0.01, 0.01), (6, 0, 0.02, 0.05)])
def test_empirical_converse(n, m, p11, q11):
    P = sparse_model(n, m, p11, q11)
    assert margin_converse(P) < -1.5
    trials = 2000
    res = mc_alignment_success(P, trials, seed=21)
    rate = res.success_rate
    se = math.sqrt(max(rate * (1 - rate), 1 / trials) / trials)
    assert rate <= res.mean_success_cap + 3 * se
