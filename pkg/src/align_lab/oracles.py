"""Brute-force references that avoid the orbit machinery.

These enumerate complete edge assignments of small graphs and evaluate δ_π
straight from its pairwise definition.  They exist to cross-check the
generating-function route and the closed forms.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict

import numpy as np

from .model import JointEdgeDistribution, ModelParams
from .permutation import Permutation

MAX_BRUTE_PAIRS = 9


def _assignments(t: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``4^t`` joint assignments as (g, h) boolean arrays of shape ``(4^t, t)``."""
    codes = np.arange(4 ** t, dtype=np.int64)
    digits = (codes[:, None] // (4 ** np.arange(t))[None, :]) % 4
    return (digits >> 1).astype(bool), (digits & 1).astype(bool)


def _state_prob(g: np.ndarray, h: np.ndarray, d: JointEdgeDistribution) -> np.ndarray:
    table = np.array([[d.p00, d.p01], [d.p10, d.p11]])
    return table[g.astype(int), h.astype(int)].prod(axis=1)


def user_excess_law(perm: Permutation, dist: JointEdgeDistribution) -> dict[int, float]:
    """Law of the user part ``Σ_{i<j} 1{G1(i,j) ≠ G2(π i, π j)} − 1{G1(i,j) ≠ G2(i,j)}``.

    Every assignment of all ``C(n,2)`` user pairs is enumerated.
    """
    n = len(perm)
    iu, ju = np.triu_indices(n, 1)
    t = len(iu)
    if t > MAX_BRUTE_PAIRS:
        raise ValueError(f"{t} user pairs is too many to enumerate")
    if t == 0:
        return {0: 1.0}
    g, h = _assignments(t)
    k = g.shape[0]
    G = np.zeros((k, n, n), dtype=bool)
    H = np.zeros((k, n, n), dtype=bool)
    G[:, iu, ju] = g
    G[:, ju, iu] = g
    H[:, iu, ju] = h
    H[:, ju, iu] = h
    p = perm.as_array()
    Hp = H[:, p[iu], p[ju]]
    excess = (G[:, iu, ju] != Hp).sum(1) - (g != h).sum(1)
    return _law(excess, _state_prob(g, h, dist))


def attr_excess_law(perm: Permutation, m: int, dist: JointEdgeDistribution) -> dict[int, float]:
    """Law of the attribute part, enumerating all ``n·m`` user–attribute pairs."""
    n = len(perm)
    t = n * m
    if t > MAX_BRUTE_PAIRS:
        raise ValueError(f"{t} attribute pairs is too many to enumerate")
    if t == 0:
        return {0: 1.0}
    g, h = _assignments(t)
    G = g.reshape(-1, n, m)
    H = h.reshape(-1, n, m)
    Hp = H[:, perm.as_array(), :]
    excess = (G != Hp).sum((1, 2)) - (G != H).sum((1, 2))
    return _law(excess, _state_prob(g, h, dist))


def _law(values: np.ndarray, probs: np.ndarray) -> dict[int, float]:
    out: dict[int, float] = defaultdict(float)
    for v in np.unique(values):
        out[int(v)] = math.fsum(probs[values == v])
    return dict(out)


def brute_delta_law(perm: Permutation, params: ModelParams) -> dict[tuple[int, int], float]:
    """Joint law of ``(a, b)`` with ``δ_π = a·w1 + b·w2``.

    User and attribute pairs are independent, so the two exhaustively
    enumerated laws multiply.
    """
    lu = user_excess_law(perm, params.p_user)
    la = attr_excess_law(perm, params.m, params.q_attr)
    return {(a, b): pa * pb for a, pa in lu.items() for b, pb in la.items()}


def brute_prob_delta_leq_zero(perm: Permutation, params: ModelParams, w1: float, w2: float) -> float:
    law = brute_delta_law(perm, params)
    return math.fsum(c for (a, b), c in law.items() if a * w1 + b * w2 <= 1e-12)


def naive_orbit_law(l: int, dist: JointEdgeDistribution) -> dict[int, float]:
    """Size-``l`` orbit law by looping over every assignment one at a time."""
    out: dict[int, float] = defaultdict(float)
    probs = {(1, 1): dist.p11, (1, 0): dist.p10, (0, 1): dist.p01, (0, 0): dist.p00}
    for states in itertools.product(probs, repeat=l):
        pr = math.prod(probs[s] for s in states)
        d = 0
        for k in range(l):
            g = states[k][0]
            d += (g != states[(k + 1) % l][1]) - (g != states[k][1])
        out[d] += pr
    return dict(out)


def brute_equiv_probs(n: int, m: int, p11: float, q11: float) -> tuple[float, float, float]:
    """Exact P(0≡1), P(0≡1≡2), P(0≡1 and 2≡3) by enumerating intersection graphs.

    Only pairs that can influence the events are enumerated, which keeps
    ``n ≤ 5, m ≤ 1`` tractable.
    """
    from .indist import equivalence_matrix
    from .model import AttributedGraph

    iu, ju = np.triu_indices(n, 1)
    t = len(iu) + n * m
    if t > 16:
        raise ValueError("instance too large for exhaustive enumeration")
    pair_p = np.concatenate([np.full(len(iu), p11), np.full(n * m, q11)])
    acc = [0.0, 0.0, 0.0]
    for code in range(1 << t):
        bits = np.array([(code >> k) & 1 for k in range(t)], dtype=bool)
        pr = float(np.prod(np.where(bits, pair_p, 1 - pair_p)))
        adj = np.zeros((n, n), dtype=bool)
        adj[iu, ju] = bits[: len(iu)]
        adj |= adj.T
        g = AttributedGraph(adj, bits[len(iu):].reshape(n, m))
        e = equivalence_matrix(g)
        if e[0, 1]:
            acc[0] += pr
            if n >= 3 and e[1, 2] and e[0, 2]:
                acc[1] += pr
            if n >= 4 and e[2, 3]:
                acc[2] += pr
    return tuple(acc)
