import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import hypergeom

from align_lab.alignment import weights
from align_lab.bounds import (
    SparseBoundInputs,
    bin_pgf,
    binomial_lower_bound_holds,
    classify_region,
    converse_value,
    geometric_tail,
    hyp_pgf_bound,
    hyp_pgf_exact,
    lemma2_value,
    margin_converse,
    margin_corollary,
    margin_lemma2,
    margin_report,
    margin_thm1,
    r_tilde_star,
    thm1_value,
    tilted_x11,
    truncated_union_bound,
    union_bound_error,
    union_ratio,
)
from align_lab.errors import DegenerateInput, PsiOutOfRange
from align_lab.experiments import mc_alignment_success, trial_seed
from align_lab.genfunc import induced_orbits, psi
from align_lab.model import ModelParams, sample_pair, validate
from align_lab.permutation import Permutation
from strategies import P_EX, Q_EX, positive_dists

LN100 = math.log(100)


def params(n, m, p11=0.1, q11=0.1, p=None, q=None):
    p = p or [[p11, (1 - p11) / 4], [(1 - p11) / 4, (1 - p11) / 2]]
    q = q or [[q11, (1 - q11) / 4], [(1 - q11) / 4, (1 - q11) / 2]]
    return ModelParams(n, m, validate(p), validate(q))


def test_margin_thm1_examples():
    assert thm1_value(math.e, 0, 1 / math.e, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert margin_thm1(params(100, 0, 0.1)) == pytest.approx(10 - LN100, abs=1e-12)
    assert round(margin_thm1(params(100, 0, 0.1)), 5) == 5.39483


def test_margin_thm1_diagonal_attributes():
    q = [[0.3, 0.0], [0.0, 0.7]]
    P = params(50, 7, 0.05, q=q)
    assert margin_thm1(P) == pytest.approx(50 * 0.05 + 7 * 0.3 * 0.7 - math.log(50), abs=1e-12)


def test_margin_lemma2_examples():
    indep = [[0.25, 0.25], [0.25, 0.25]]
    P = ModelParams(30, 5, validate(indep), validate(indep))
    assert margin_lemma2(P) == pytest.approx(-math.log(30), abs=1e-15)
    P = ModelParams(10, 3, validate(P_EX), validate(Q_EX))
    psi_u = (math.sqrt(0.12 * 0.72) - 0.08) ** 2
    psi_a = (math.sqrt(0.3 * 0.5) - 0.1) ** 2
    assert margin_lemma2(P) == pytest.approx(10 * psi_u / 2 + 3 * psi_a - math.log(10), abs=1e-12)
    # substituting ψu/2 for p11 turns one margin into the other
    assert lemma2_value(10, 3, psi_u, psi_a) == thm1_value(10, 3, psi_u / 2, psi_a)


def test_margin_converse_examples():
    P = params(100, 10, 0.01, 0.1)
    assert margin_converse(P) == pytest.approx(2 - LN100, abs=1e-12)
    assert round(margin_converse(P), 5) == -2.60517
    assert converse_value(42, 9, 0.0, 0.0) == -math.log(42)


@given(positive_dists(), positive_dists(), st.integers(2, 500), st.integers(0, 500))
def test_converse_dominates_thm1(p, q, n, m):
    P = ModelParams(n, m, p, q)
    assert margin_converse(P) >= margin_thm1(P) - 1e-12


def test_corollary_subtracts_exposed_term():
    P = params(100, 10, 0.01, 0.1)
    assert margin_corollary(P, c=0) == margin_converse(P)
    assert margin_corollary(P, c=2) == pytest.approx(margin_converse(P) - 20 * 0.1 ** 1.5, abs=1e-12)


def test_region_examples():
    assert classify_region(params(100, 0, 0.1)) == "R1"
    assert classify_region(params(100, 10, 0.01, 0.1)) == "R4"
    strong = [[0.45, 0.02], [0.02, 0.51]]
    P = ModelParams(100, 1000, validate([[0.0, 0.2], [0.2, 0.6]]), validate(strong))
    assert 0.45 > 1000 ** (-2 / 3)
    assert classify_region(P) == "R3"


def test_region_r2_and_m0_fallback():
    # q11 below m^(-2/3) with a positive converse margin
    P = params(100, 10 ** 6, 0.0, 5e-5, p=[[0.0, 0.3], [0.3, 0.4]])
    assert classify_region(P) == "R2"
    # with m = 0 only R1, R4 or UNDETERMINED can come back
    P = params(100, 0, 0.046)
    assert abs(margin_converse(P)) < 1 and classify_region(P, eps=1.0) == "UNDETERMINED"
    assert classify_region(params(100, 0, 0.03)) == "R4"


def test_region_eps_slack():
    P = params(100, 0, 0.1)
    assert classify_region(P, eps=5.0) == "R1"
    assert classify_region(P, eps=6.0) == "UNDETERMINED"


@given(positive_dists(), positive_dists(), st.integers(2, 300), st.integers(0, 300), st.floats(0, 3))
def test_region_consistency(p, q, n, m, eps):
    P = ModelParams(n, m, p, q)
    r = classify_region(P, eps)
    if margin_converse(P) < -eps:
        assert r not in ("R1", "R2", "R3")
    if margin_thm1(P) > eps:
        assert r != "R4"
    rep = margin_report(P, eps)
    if rep.region == "R4":
        assert rep.margin_converse < 0


def test_margins_monotone_finite_differences():
    h = 1e-6
    grid = np.linspace(0.0, 0.45, 7)
    for n in (3, 20, 100):
        for m in (1, 3, 40):
            for x in grid:
                for y in grid:
                    # each margin in each of its own arguments
                    assert thm1_value(n, m, x + h, y) > thm1_value(n, m, x, y)
                    assert thm1_value(n, m, x, y + h) > thm1_value(n, m, x, y)
                    assert lemma2_value(n, m, x + h, y) > lemma2_value(n, m, x, y)
                    assert lemma2_value(n, m, x, y + h) > lemma2_value(n, m, x, y)
                    assert converse_value(n, m, x + h, y) > converse_value(n, m, x, y)
                    assert converse_value(n, m, x, y + h) > converse_value(n, m, x, y)
    # through distributions: moving mass from p00 to p11 with the cross entries held
    for p11 in np.linspace(0.05, 0.6, 8):
        a = params(30, 4, p=[[p11, 0.1], [0.1, 0.8 - p11]])
        b = params(30, 4, p=[[p11 + h, 0.1], [0.1, 0.8 - p11 - h]])
        assert margin_thm1(b) > margin_thm1(a) and margin_converse(b) > margin_converse(a)
        a = params(30, 4, q=[[p11, 0.1], [0.1, 0.8 - p11]])
        b = params(30, 4, q=[[p11 + h, 0.1], [0.1, 0.8 - p11 - h]])
        assert margin_converse(b) > margin_converse(a)


def test_margin_report_json_fields():
    rep = margin_report(ModelParams(10, 3, validate(P_EX), validate(Q_EX)))
    d = json.loads(rep.to_json())
    for k in ("margin_thm1", "margin_lemma2", "margin_converse", "margin_corollary", "region", "union_bound"):
        assert k in d
    assert set(d["sparse_checks"]) == {"p11_n_over_log_n", "cross_times_log_n", "cross_ratio_log_n_cubed"}
    assert d["sparse_checks"]["p11_n_over_log_n"] == pytest.approx(0.12 * 10 / math.log(10))
    assert d["sparse_checks"]["cross_times_log_n"] == pytest.approx(0.16 * math.log(10))
    assert d["sparse_checks"]["cross_ratio_log_n_cubed"] == pytest.approx(
        0.0064 / (0.12 * 0.72) * math.log(10) ** 3
    )


# ---------------------------------------------------------------------------
# union bound


def test_union_bound_examples():
    indep = [[0.25, 0.25], [0.25, 0.25]]
    assert union_bound_error(ModelParams(5, 2, validate(indep), validate(indep))) == math.inf
    assert geometric_tail(0.5) == 0.5
    rho = union_ratio(20, 30, 0.04, 0.21)
    assert rho == pytest.approx(20 * 0.92 ** 4.5 * 0.58 ** 15, rel=1e-12)
    with pytest.raises(PsiOutOfRange):
        union_ratio(5, 1, 0.5, 0.1)


def _dist_with_psi(psi_target, cross):
    # symmetric cross entries: (sqrt(p11 p00) - cross)^2 = psi_target, p11 + p00 = 1 - 2 cross
    s = 1 - 2 * cross
    prod = (math.sqrt(psi_target) + cross) ** 2
    p11 = (s - math.sqrt(s * s - 4 * prod)) / 2
    return validate([[p11, cross], [cross, s - p11]])


def _transposition_error_rate(P, trials, seed):
    """Fraction of trials where some transposition ties or beats the identity.

    Every such trial is a MAP failure, so this underestimates the MAP error.
    """
    w = weights(P)
    n = P.n
    iu, ju = np.triu_indices(n, 1)
    taus = []
    for i in range(n):
        for j in range(i + 1, n):
            t = np.arange(n)
            t[i], t[j] = j, i
            taus.append(t)
    hits = 0
    for k in range(trials):
        pair = sample_pair(P, trial_seed(seed, 0, k, 0))
        g1u, g2u, g1a, g2a = pair.g1.user_adj, pair.g2.user_adj, pair.g1.attr_adj, pair.g2.attr_adj
        base_u = int((g1u[iu, ju] != g2u[iu, ju]).sum())
        base_a = int((g1a != g2a).sum())
        for t in taus:
            du = int((g1u[iu, ju] != g2u[t[iu], t[ju]]).sum()) - base_u
            da = int((g1a != g2a[t]).sum()) - base_a
            if du * w.w1 + da * w.w2 <= 1e-12:
                hits += 1
                break
    return hits / trials


def test_union_bound_n20_dominates_empirical():
    p = _dist_with_psi(0.04, 0.08)
    q = _dist_with_psi(0.21, 0.02)
    assert psi(p) == pytest.approx(0.04, abs=1e-12) and psi(q) == pytest.approx(0.21, abs=1e-12)
    P = ModelParams(20, 30, p, q)
    bound = union_bound_error(P)
    assert bound == pytest.approx(geometric_tail(20 * 0.92 ** 4.5 * 0.58 ** 15), rel=1e-9)
    trials = 400
    est = _transposition_error_rate(P, trials, seed=2024)
    se = math.sqrt(max(est * (1 - est), 1 / trials) / trials)
    assert bound >= est - 3 * se


STRONG_Q = [[0.45, 0.02], [0.02, 0.51]]
DOMINANCE_POINTS = [
    (4, 8, [[0.2, 0.1], [0.1, 0.6]], STRONG_Q),
    (4, 6, [[0.3, 0.05], [0.05, 0.6]], STRONG_Q),
    (5, 8, [[0.2, 0.1], [0.1, 0.6]], STRONG_Q),
    (5, 10, P_EX, [[0.4, 0.03], [0.03, 0.54]]),
    (6, 10, [[0.3, 0.05], [0.05, 0.6]], STRONG_Q),
]


@pytest.mark.parametrize("n,m,p,q", DOMINANCE_POINTS)
def test_union_bound_dominates_map_error(n, m, p, q):
    P = ModelParams(n, m, validate(p), validate(q))
    rho = union_ratio(n, m, psi(P.p_user), psi(P.q_attr))
    assert rho < 0.9
    trials = 20_000
    res = mc_alignment_success(P, trials, seed=99)
    err = 1 - res.success_rate
    se = math.sqrt(err * (1 - err) / trials)
    assert union_bound_error(P) >= err - 3 * se


# ---------------------------------------------------------------------------
# sparse regime pieces


def test_tilted_x11_examples():
    p = validate([[0.5, 0.1], [0.1, 0.3]])
    inp = SparseBoundInputs(r=3, r_tilde=0, n=7, m=2, t_user=21, t_tilde_user=6)
    assert tilted_x11(inp, p) == pytest.approx(0.5, abs=1e-15)
    inp = SparseBoundInputs(r=2, r_tilde=2, n=math.e ** 2, m=0, t_user=20, t_tilde_user=10)
    assert tilted_x11(inp, p) == pytest.approx(0.9, abs=1e-12)


def test_tilted_x11_errors():
    bad_p = validate([[0.0, 0.5], [0.5, 0.0]])
    inp = SparseBoundInputs(r=1, r_tilde=1, n=5, m=0, t_user=10, t_tilde_user=4)
    with pytest.raises(DegenerateInput):
        tilted_x11(inp, bad_p)
    with pytest.raises(DegenerateInput):
        tilted_x11(SparseBoundInputs(r=0, r_tilde=0, n=5, m=0, t_user=10, t_tilde_user=0), P_DIST)
    with pytest.raises(DegenerateInput):
        SparseBoundInputs(r=1, r_tilde=2, n=5, m=0, t_user=10, t_tilde_user=4)


P_DIST = validate(P_EX)


@given(st.integers(2, 60), st.data())
def test_tilted_x11_positive(n, data):
    t = n * (n - 1) // 2
    r = data.draw(st.integers(0, t))
    rt = data.draw(st.integers(0, r))
    tt = data.draw(st.integers(1, t))
    p11 = data.draw(st.floats(0.001, 0.999))
    d = validate([[p11, (1 - p11) / 2], [(1 - p11) / 2, 0.0]])
    assert tilted_x11(SparseBoundInputs(r, rt, n, 0, t, tt), d) > 0


def test_r_tilde_star_default_constant():
    inp = SparseBoundInputs.for_graph(n=10, m=0, r=9, r_tilde=1, t_tilde_user=10)
    assert inp.C_rstar == pytest.approx(math.e + 1.01)
    assert r_tilde_star(inp) == pytest.approx((math.e + 1.01) * 9 * 10 / 45)


def test_hyp_pgf_bound_examples():
    assert hyp_pgf_bound(0, 10, 2, 0.7) == 1.0
    exact = hyp_pgf_exact(5, 45, 10, 0.3)
    assert exact == pytest.approx(sum(hypergeom(45, 10, 5).pmf(k) * 0.3 ** k for k in range(6)), rel=1e-12)
    assert hyp_pgf_bound(5, 10, 2, 0.3) >= exact


def test_hyp_pgf_exact_edge_cases():
    assert hyp_pgf_exact(0, 10, 4, 0.2) == 1.0
    assert hyp_pgf_exact(10, 10, 4, 0.5) == pytest.approx(0.5 ** 4)
    with pytest.raises(DegenerateInput):
        hyp_pgf_exact(3, 5, 6, 0.5)
    with pytest.raises(DegenerateInput):
        hyp_pgf_bound(1, 1, 1, 0.5)


def test_hyp_below_bin_random_tuples():
    rng = np.random.default_rng(77)
    for _ in range(50):
        N = int(rng.integers(2, 200))
        K = int(rng.integers(0, N + 1))
        r = int(rng.integers(0, N + 1))
        z = float(rng.uniform(0.01, 3.0))
        h = hyp_pgf_exact(r, N, K, z)
        ref = float(np.sum(hypergeom(N, K, r).pmf(np.arange(r + 1)) * z ** np.arange(r + 1)))
        assert h == pytest.approx(ref, rel=1e-9, abs=1e-300)
        assert h <= bin_pgf(r, N, K, z) * (1 + 1e-12)


def test_hyp_bound_dominates_on_permutation_tuples():
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(80):
        n = int(rng.integers(3, 30))
        perm = Permutation.random(n, rng.integers(1 << 30))
        if perm.is_identity():
            continue
        orb = induced_orbits(perm, n, 0)
        N, K = n * (n - 1) // 2, orb.t_tilde_user
        r = int(rng.integers(0, N + 1))
        z = float(rng.uniform(0.01, 1.0))
        assert hyp_pgf_bound(r, n, orb.n_moved, z) >= hyp_pgf_exact(r, N, K, z) * (1 - 1e-12)
        checked += 1
    assert checked >= 50


def test_truncated_union_bound_examples():
    n = 12
    assert truncated_union_bound(SparseBoundInputs(0, 0, n, 0, 66, 1), 0.1) == 1.0
    r = n * math.log(n)
    inp = SparseBoundInputs(r, 0, n, 0, 10 ** 6, 1)
    assert truncated_union_bound(inp, 0.0) == pytest.approx(3 / n ** 2, rel=1e-12)
    with pytest.raises(PsiOutOfRange):
        truncated_union_bound(inp, 0.5)


@given(st.integers(2, 200), st.data())
def test_truncated_union_bound_at_most_one(n, data):
    t = n * (n - 1) // 2
    r = data.draw(st.integers(0, t))
    m = data.draw(st.integers(0, 1000))
    c = data.draw(st.floats(-5, 5))
    psi_a = data.draw(st.floats(0, 0.4999))
    v = truncated_union_bound(SparseBoundInputs(r, 0, n, m, t, 1, C_trunc=c), psi_a)
    assert 0 <= v <= 1


def test_binomial_lower_bound_random_tuples():
    rng = np.random.default_rng(31)
    for _ in range(100):
        t = int(rng.integers(1, 400))
        r = int(rng.integers(0, t + 1))
        p = Fraction(int(rng.integers(1, 1000)), 1000)
        assert binomial_lower_bound_holds(t, r, p)
    with pytest.raises(DegenerateInput):
        binomial_lower_bound_holds(3, 4, Fraction(1, 2))
