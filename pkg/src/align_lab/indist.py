"""Indistinguishable user pairs in an intersection graph and converse bounds.

Users ``i`` and ``j`` are indistinguishable (``i ≡ j``) when their rows agree
on every user vertex outside ``{i, j}`` and on every attribute vertex.
Swapping such a pair is an automorphism, which caps MAP success.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import NTooSmall, ZeroPairProbability
from .model import AttributedGraph


@dataclass(frozen=True)
class EquivStats:
    x_count: int
    triple_count: int
    two_disjoint_pair_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def equivalence_matrix(g: AttributedGraph) -> np.ndarray:
    """Boolean ``n × n`` matrix of ``i ≡ j`` (diagonal False)."""
    u = g.user_adj.astype(np.int64)
    a = g.attr_adj.astype(np.int64)
    # row mismatches over all columns; columns i and j each differ iff G(i,j)=1
    du = u.sum(1)[:, None] + u.sum(1)[None, :] - 2 * (u @ u.T) - 2 * u
    da = a.sum(1)[:, None] + a.sum(1)[None, :] - 2 * (a @ a.T)
    eq = (du == 0) & (da == 0)
    np.fill_diagonal(eq, False)
    return eq


def stats_from_equivalence(eq: np.ndarray) -> EquivStats:
    e = eq.astype(np.int64)
    x = int(e.sum()) // 2
    triples = int(np.trace(e @ e @ e)) // 6
    deg = e.sum(1)
    # two distinct pairs share at most one vertex
    sharing = int((deg * (deg - 1) // 2).sum())
    disjoint = x * (x - 1) // 2 - sharing
    return EquivStats(x, triples, disjoint)


def count_indistinguishable(g: AttributedGraph) -> EquivStats:
    """Counts of indistinguishable pairs, triples and vertex-disjoint pairs of pairs."""
    return stats_from_equivalence(equivalence_matrix(g))


def indistinguishable_pairs(g: AttributedGraph) -> list[tuple[int, int]]:
    iu, ju = np.nonzero(np.triu(equivalence_matrix(g), 1))
    return [(int(i), int(j)) for i, j in zip(iu, ju)]


def batch_equiv_stats(user: np.ndarray, attr: np.ndarray) -> np.ndarray:
    """Vectorised counts over a batch of graphs.

    ``user`` has shape ``(T, n, n)`` and ``attr`` shape ``(T, n, m)``; returns a
    ``(T, 3)`` integer array of (pairs, triples, disjoint pairs of pairs).
    """
    u = user.astype(np.int64)
    a = attr.astype(np.int64)
    su = u.sum(2)
    sa = a.sum(2)
    du = su[:, :, None] + su[:, None, :] - 2 * np.einsum("tik,tjk->tij", u, u) - 2 * u
    da = sa[:, :, None] + sa[:, None, :] - 2 * np.einsum("tik,tjk->tij", a, a)
    e = ((du == 0) & (da == 0)).astype(np.int64)
    n = u.shape[1]
    e[:, np.arange(n), np.arange(n)] = 0
    x = e.sum((1, 2)) // 2
    e2 = np.einsum("tij,tjk->tik", e, e)
    triples = np.einsum("tij,tji->t", e2, e) // 6
    deg = e.sum(2)
    disjoint = x * (x - 1) // 2 - (deg * (deg - 1) // 2).sum(1)
    return np.stack([x, triples, disjoint], axis=1)


# ---------------------------------------------------------------------------
# closed forms under the model (intersection edge probabilities p11, q11)


def _agree2(p: float) -> float:
    return 1 - 2 * p + 2 * p * p


def _agree3(p: float) -> float:
    return 1 - 3 * p + 3 * p * p


def p_equiv_pair(n: int, m: int, p11: float, q11: float) -> float:
    """P(i ≡ j) for a fixed pair."""
    if n < 2:
        raise NTooSmall(f"need n >= 2, got {n}")
    return _agree2(p11) ** (n - 2) * _agree2(q11) ** m


def p_equiv_triple(n: int, m: int, p11: float, q11: float) -> float:
    """P(i ≡ j ≡ k) for a fixed triple, internal triangle included."""
    if n < 3:
        raise NTooSmall(f"need n >= 3, got {n}")
    return _agree3(p11) ** (n - 2) * _agree3(q11) ** m


def p_equiv_two_pairs(n: int, m: int, p11: float, q11: float) -> float:
    """P(i ≡ j and k ≡ l) for fixed disjoint pairs.

    The four cross pairs between ``{i, j}`` and ``{k, l}`` must all carry the
    same value; every other user vertex and every attribute must agree on
    both pairs independently.
    """
    if n < 4:
        raise NTooSmall(f"need n >= 4, got {n}")
    p = p11
    cross = p ** 4 + (1 - p) ** 4
    return cross * _agree2(p11) ** (2 * n - 8) * _agree2(q11) ** (2 * m)


def p_equiv_two_pairs_as_printed(n: int, m: int, p11: float, q11: float) -> float:
    """Variant with a six-edge cross factor, kept to show it disagrees with simulation."""
    if n < 4:
        raise NTooSmall(f"need n >= 4, got {n}")
    p = p11
    cross = p ** 6 + p ** 4 * (1 - p) ** 2 + p ** 2 * (1 - p) ** 4 + (1 - p) ** 6
    return cross * _agree2(p11) ** (2 * n - 8) * _agree2(q11) ** (2 * m)


def chebyshev_p_x_zero(n: int, m: int, p11: float, q11: float) -> float:
    """Second-moment bound ``Var(X)/E[X]²`` on P(X = 0), clamped to [0, 1]."""
    if n < 4:
        raise NTooSmall(f"need n >= 4, got {n}")
    p1 = p_equiv_pair(n, m, p11, q11)
    if p1 <= 0:
        raise ZeroPairProbability("P(i ≡ j) is zero, the bound is undefined")
    p3 = p_equiv_triple(n, m, p11, q11)
    p22 = p_equiv_two_pairs(n, m, p11, q11)
    nn = n * (n - 1)
    val = (
        2 / (nn * p1)
        + 4 * (n - 2) / nn * p3 / p1 ** 2
        + (n - 2) * (n - 3) / nn * p22 / p1 ** 2
        - 1
    )
    return min(1.0, max(0.0, val))


def map_success_upper(x_count: Optional[int] = None, p_x_zero: Optional[float] = None) -> float:
    """Converse caps on MAP success.

    Given an observed count ``x_count`` of indistinguishable pairs the success
    probability is at most ``1/(x_count + 1)`` (at most 1/2 once a pair
    exists, and this form is used per trial).  Given ``p_x_zero`` the
    aggregate cap is ``1/2 + p_x_zero/2``.
    """
    if (x_count is None) == (p_x_zero is None):
        raise ValueError("pass exactly one of x_count or p_x_zero")
    if x_count is not None:
        if x_count < 0:
            raise ValueError("x_count must be nonnegative")
        return 1.0 / (x_count + 1)
    if not 0 <= p_x_zero <= 1:
        raise ValueError("p_x_zero must lie in [0, 1]")
    return 0.5 + 0.5 * p_x_zero
