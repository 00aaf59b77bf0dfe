"""Weighted Hamming distance, δ_π, and the exhaustive MAP aligner."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NonpositiveCorrelation, NTooLarge, ZeroEntry
from .genfunc import MuNuCounts
from .model import AttributedGraph, JointEdgeDistribution, ModelParams
from .permutation import Permutation, all_permutations

DEFAULT_CAP = 9
TIE_RTOL = 1e-9
_CHUNK = 40320


@dataclass(frozen=True)
class Weights:
    w1: float
    w2: float

    def __post_init__(self):
        if not (self.w1 > 0 and self.w2 > 0):
            raise NonpositiveCorrelation(f"weights must be positive, got ({self.w1}, {self.w2})")

    def scaled(self, lam: float) -> "Weights":
        return Weights(self.w1 * lam, self.w2 * lam)


def _log_ratio(d: JointEdgeDistribution, label: str) -> float:
    if not d.all_positive:
        raise ZeroEntry(f"{label} has a zero entry, weight would be infinite")
    return math.log(d.p11 * d.p00 / (d.p10 * d.p01))


def weights(params: ModelParams) -> Weights:
    """Log-likelihood-ratio weights of user and attribute disagreements."""
    w1 = _log_ratio(params.p_user, "p_user")
    w2 = _log_ratio(params.q_attr, "q_attr")
    if w1 <= 0 or w2 <= 0:
        raise NonpositiveCorrelation(f"w1={w1}, w2={w2}: both matrices must be positively correlated")
    return Weights(w1, w2)


def _check_dims(g1: AttributedGraph, g2: AttributedGraph) -> None:
    if (g1.n, g1.m) != (g2.n, g2.m):
        raise DimensionMismatch(f"graph shapes {(g1.n, g1.m)} and {(g2.n, g2.m)} differ")


def delta_u(g1: AttributedGraph, g2: AttributedGraph) -> int:
    """Number of user pairs whose edge indicators differ."""
    _check_dims(g1, g2)
    return int(np.count_nonzero(g1.user_adj != g2.user_adj)) // 2


def delta_a(g1: AttributedGraph, g2: AttributedGraph) -> int:
    """Number of user–attribute pairs whose edge indicators differ."""
    _check_dims(g1, g2)
    return int(np.count_nonzero(g1.attr_adj != g2.attr_adj))


def _relabel_back(g2_anon: AttributedGraph, perm: Permutation) -> AttributedGraph:
    """``π⁻¹(G2′)``: the graph whose pair ``{i, j}`` reads ``G2′(π(i), π(j))``."""
    if len(perm) != g2_anon.n:
        raise DimensionMismatch(f"permutation of length {len(perm)} for n={g2_anon.n}")
    p = perm.as_array()
    return AttributedGraph(g2_anon.user_adj[np.ix_(p, p)], g2_anon.attr_adj[p])


def _mismatch_counts(g1: AttributedGraph, g2_anon: AttributedGraph, perm: Permutation) -> tuple[int, int]:
    _check_dims(g1, g2_anon)
    h = _relabel_back(g2_anon, perm)
    return delta_u(g1, h), delta_a(g1, h)


def weighted_distance(g1: AttributedGraph, g2_anon: AttributedGraph, perm: Permutation, w: Weights) -> float:
    du, da = _mismatch_counts(g1, g2_anon, perm)
    return w.w1 * du + w.w2 * da


def delta_pi(g1: AttributedGraph, g2: AttributedGraph, perm: Permutation, w: Weights) -> float:
    """Excess weighted distance of ``perm`` over the identity.

    Pair ``e`` contributes ``1{G1(e) ≠ G2(π(e))} − 1{G1(e) ≠ G2(e)}`` with
    ``π(e)`` the induced image of the pair; pairs fixed by ``π`` contribute 0.
    """
    du, da = _mismatch_counts(g1, g2, perm)
    du0, da0 = delta_u(g1, g2), delta_a(g1, g2)
    return w.w1 * (du - du0) + w.w2 * (da - da0)


def delta_pi_counts(g1: AttributedGraph, g2: AttributedGraph, perm: Permutation) -> tuple[int, int]:
    """Integer exponents ``(a, b)`` with ``δ_π = a·w1 + b·w2``."""
    du, da = _mismatch_counts(g1, g2, perm)
    return du - delta_u(g1, g2), da - delta_a(g1, g2)


# ---------------------------------------------------------------------------
# exhaustive search


def mismatch_table(
    g1u: np.ndarray, g1a: np.ndarray, g2u: np.ndarray, g2a: np.ndarray, perms: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """User and attribute mismatch counts of every row of ``perms``.

    Row ``π`` compares ``G1(i, j)`` with ``G2′(π(i), π(j))`` and ``G1(i, a)``
    with ``G2′(π(i), a)``.
    """
    n = g1u.shape[0]
    k = perms.shape[0]
    du = np.empty(k, dtype=np.int64)
    # attribute mismatches are linear in the assignment: D[i, v] = |row_i(G1) xor row_v(G2')|
    if g1a.shape[1]:
        d_attr = (g1a[:, None, :] != g2a[None, :, :]).sum(-1)
        da = d_attr[np.arange(n), perms].sum(1)
    else:
        da = np.zeros(k, dtype=np.int64)
    for lo in range(0, k, _CHUNK):
        p = perms[lo : lo + _CHUNK]
        h = g2u[p[:, :, None], p[:, None, :]]
        du[lo : lo + _CHUNK] = (h != g1u).sum((1, 2)) // 2
    return du, da


def _argmin_rows(dist: np.ndarray) -> tuple[np.ndarray, float]:
    best = float(dist.min())
    tol = TIE_RTOL * max(1.0, abs(best))
    return np.flatnonzero(dist <= best + tol), best


@dataclass(frozen=True)
class AlignmentOutcome:
    minimizers: tuple[Permutation, ...]
    min_distance: float
    unique: bool
    matches_truth: Optional[bool] = None
    tie_pick: Optional[Permutation] = None
    tie_pick_matches: Optional[bool] = None

    def __post_init__(self):
        if not self.minimizers:
            raise ValueError("an alignment outcome needs at least one minimizer")
        if self.unique != (len(self.minimizers) == 1):
            raise ValueError("unique flag disagrees with the minimizer count")

    def to_json(self) -> dict:
        doc = {
            "minimizers": [list(p) for p in self.minimizers],
            "n_minimizers": len(self.minimizers),
            "min_distance": self.min_distance,
            "unique": self.unique,
        }
        if self.matches_truth is not None:
            doc["matches_truth"] = self.matches_truth
        if self.tie_pick is not None:
            doc["tie_pick"] = list(self.tie_pick)
            if self.tie_pick_matches is not None:
                doc["tie_pick_matches"] = self.tie_pick_matches
        return doc


def map_align(
    g1: AttributedGraph,
    g2_anon: AttributedGraph,
    params: ModelParams,
    cap: int = DEFAULT_CAP,
    truth: Optional[Permutation] = None,
    tie_seed: Optional[int] = None,
) -> AlignmentOutcome:
    """Minimise the weighted distance over all of S_n.

    Minimizers are returned in lexicographic order.  Success against
    ``truth`` means a unique minimizer equal to it.  With ``tie_seed`` one
    minimizer is also drawn uniformly and reported separately.
    """
    _check_dims(g1, g2_anon)
    n = g1.n
    if n > cap:
        raise NTooLarge(f"n={n} exceeds the exhaustive-search cap {cap}")
    w = weights(params)
    perms = all_permutations(n)
    du, da = mismatch_table(g1.user_adj, g1.attr_adj, g2_anon.user_adj, g2_anon.attr_adj, perms)
    idx, best = _argmin_rows(w.w1 * du + w.w2 * da)
    mins = tuple(Permutation(perms[i]) for i in idx)
    matches = None
    if truth is not None:
        matches = len(mins) == 1 and mins[0] == truth
    pick = pick_ok = None
    if tie_seed is not None:
        pick = mins[int(np.random.default_rng(tie_seed).integers(len(mins)))]
        pick_ok = None if truth is None else pick == truth
    return AlignmentOutcome(mins, best, len(mins) == 1, matches, pick, pick_ok)


# ---------------------------------------------------------------------------
# posterior oracle


def _joint_counts(g1: AttributedGraph, h: AttributedGraph) -> MuNuCounts:
    iu, ju = np.triu_indices(g1.n, 1)
    return MuNuCounts.from_arrays(
        g1.user_adj[iu, ju], h.user_adj[iu, ju], g1.attr_adj, h.attr_adj
    )


def posterior_oracle(
    g1: AttributedGraph, g2_anon: AttributedGraph, perm: Permutation, params: ModelParams
) -> float:
    """Log of the unnormalised posterior weight of ``perm``.

    Computed as ``Σ μ_gh log p_gh + Σ ν_gh log q_gh`` from the joint indicator
    counts of ``(G1, π⁻¹(G2′))``; the edge totals of both graphs are checked
    against the counts along the way.
    """
    p, q = params.p_user, params.q_attr
    if not (p.all_positive and q.all_positive):
        raise ZeroEntry("posterior needs every probability strictly positive")
    _check_dims(g1, g2_anon)
    h = _relabel_back(g2_anon, perm)
    c = _joint_counts(g1, h)
    mu, nu = c.mu, c.nu
    # edge totals are permutation-invariant: β(G1) and β(π⁻¹(G2')) = β(G2')
    if mu[1, 1] + mu[1, 0] != g1.n_user_edges() or mu[1, 1] + mu[0, 1] != g2_anon.n_user_edges():
        raise RuntimeError("user edge totals disagree with joint counts")
    if nu[1, 1] + nu[1, 0] != g1.n_attr_edges() or nu[1, 1] + nu[0, 1] != g2_anon.n_attr_edges():
        raise RuntimeError("attribute edge totals disagree with joint counts")
    total = 0.0
    for g in (0, 1):
        for hh in (0, 1):
            total += mu[g, hh] * math.log(p.entry(g, hh)) + nu[g, hh] * math.log(q.entry(g, hh))
    return total


def posterior_argmax(g1: AttributedGraph, g2_anon: AttributedGraph, params: ModelParams) -> tuple[Permutation, ...]:
    """All maximisers of :func:`posterior_oracle` over S_n, lexicographic order."""
    perms = [Permutation(p) for p in all_permutations(g1.n)]
    vals = np.array([posterior_oracle(g1, g2_anon, p, params) for p in perms])
    best = float(vals.max())
    tol = TIE_RTOL * max(1.0, abs(best))
    return tuple(p for p, v in zip(perms, vals) if v >= best - tol)
