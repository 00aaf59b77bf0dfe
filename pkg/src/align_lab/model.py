"""Attributed Erdős–Rényi graph pairs: distributions, graphs, sampling.

A pair ``(G1, G2)`` lives on ``n`` user vertices and ``m`` attribute vertices.
Each unordered user pair ``{i, j}`` and each user–attribute pair ``(i, a)``
draws its joint edge indicator ``(G1(e), G2(e))`` independently from a 2×2
distribution (``p`` for user pairs, ``q`` for attribute pairs).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import DegenerateMarginal, DimensionMismatch, NegativeEntry, SumNotOne
from .permutation import Permutation

PROB_TOL = 1e-12


@dataclass(frozen=True)
class JointEdgeDistribution:
    """Joint law of the edge indicator pair ``(G1(e), G2(e))``.

    ``p10`` is the probability of an edge in ``G1`` only, ``p01`` in ``G2`` only.
    Construct through :func:`validate` unless the entries are known good.
    """

    p11: float
    p10: float
    p01: float
    p00: float

    @property
    def matrix(self) -> np.ndarray:
        """``[[p11, p10], [p01, p00]]``."""
        return np.array([[self.p11, self.p10], [self.p01, self.p00]])

    @property
    def quad(self) -> tuple[float, float, float, float]:
        return (self.p11, self.p10, self.p01, self.p00)

    def entry(self, g: int, h: int) -> float:
        """Probability of ``(G1(e), G2(e)) == (g, h)``."""
        return ((self.p00, self.p01), (self.p10, self.p11))[g][h]

    @property
    def positively_correlated(self) -> bool:
        return self.p11 * self.p00 > self.p10 * self.p01

    @property
    def all_positive(self) -> bool:
        return min(self.quad) > 0

    def to_dict(self) -> dict[str, float]:
        return {"p11": self.p11, "p10": self.p10, "p01": self.p01, "p00": self.p00}


def validate(dist: Any) -> JointEdgeDistribution:
    """Check and wrap a raw distribution.

    Accepts a 2×2 nested sequence ``[[p11, p10], [p01, p00]]``, a flat
    quadruple in the same row-major order, a mapping with keys
    ``p11, p10, p01, p00`` (``q..`` keys are accepted too) or an existing
    :class:`JointEdgeDistribution`.
    """
    if isinstance(dist, JointEdgeDistribution):
        vals = dist.quad
    elif isinstance(dist, Mapping):
        def pick(k):
            for prefix in ("p", "q"):
                if prefix + k in dist:
                    return dist[prefix + k]
            raise KeyError(f"missing entry {k!r}")

        vals = tuple(pick(k) for k in ("11", "10", "01", "00"))
    else:
        arr = np.asarray(dist, dtype=float)
        if arr.size != 4:
            raise ValueError(f"expected 4 probabilities, got shape {arr.shape}")
        vals = tuple(arr.reshape(4))
    vals = tuple(float(v) for v in vals)
    if any(not math.isfinite(v) for v in vals):
        raise ValueError(f"non-finite entry in {vals}")
    if min(vals) < 0:
        raise NegativeEntry(f"negative probability in {vals}")
    total = math.fsum(vals)
    if abs(total - 1.0) > PROB_TOL:
        raise SumNotOne(f"entries sum to {total!r}, not 1")
    return JointEdgeDistribution(*vals)


def correlation(dist: JointEdgeDistribution) -> float:
    """Pearson correlation of ``G1(e)`` and ``G2(e)``."""
    a = dist.p11 + dist.p10  # P(G1(e) = 1)
    b = dist.p11 + dist.p01  # P(G2(e) = 1)
    if not (0 < a < 1 and 0 < b < 1):
        raise DegenerateMarginal(f"marginals {a}, {b} must lie strictly inside (0, 1)")
    cov = dist.p11 - a * b
    rho = cov / math.sqrt(a * (1 - a) * b * (1 - b))
    return min(1.0, max(-1.0, rho))


@dataclass(frozen=True)
class SubsamplingParams:
    """Base-graph edge probability ``p`` kept with probability ``s1``/``s2`` in each copy."""

    p: float
    s1: float
    s2: float

    def __post_init__(self):
        for name in ("p", "s1", "s2"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} is outside [0, 1]")


def from_subsampling(sp: SubsamplingParams) -> JointEdgeDistribution:
    p, s1, s2 = sp.p, sp.s1, sp.s2
    p11 = p * s1 * s2
    p10 = p * s1 * (1 - s2)
    p01 = p * (1 - s1) * s2
    p00 = p * (1 - s1) * (1 - s2) + 1 - p
    return validate((p11, p10, p01, p00))


@dataclass(frozen=True)
class ModelParams:
    n: int
    m: int
    p_user: JointEdgeDistribution
    q_attr: JointEdgeDistribution

    def __post_init__(self):
        if int(self.n) != self.n or int(self.m) != self.m:
            raise ValueError(f"n and m must be integers, got {self.n}, {self.m}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")
        object.__setattr__(self, "p_user", validate(self.p_user))
        object.__setattr__(self, "q_attr", validate(self.q_attr))

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "m": self.m, "p": self.p_user.to_dict(), "q": self.q_attr.to_dict()}


# ---------------------------------------------------------------------------
# graphs


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=bool, copy=True)
    a.setflags(write=False)
    return a


class AttributedGraph:
    """A graph on ``n`` user and ``m`` attribute vertices.

    ``user_adj`` is a symmetric ``n × n`` boolean matrix with empty diagonal
    (unordered user pairs); ``attr_adj`` is an ``n × m`` boolean matrix.
    Attribute–attribute edges cannot be represented.
    """

    def __init__(self, user_adj: np.ndarray, attr_adj: np.ndarray | None = None):
        u = np.asarray(user_adj, dtype=bool)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise DimensionMismatch(f"user_adj must be square, got {u.shape}")
        n = u.shape[0]
        if attr_adj is None:
            attr_adj = np.zeros((n, 0), dtype=bool)
        a = np.asarray(attr_adj, dtype=bool)
        if a.ndim != 2 or a.shape[0] != n:
            raise DimensionMismatch(f"attr_adj must have {n} rows, got {a.shape}")
        if np.any(np.diag(u)):
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(u, u.T):
            raise ValueError("user_adj must be symmetric")
        self.user_adj = _frozen(u)
        self.attr_adj = _frozen(a)

    @property
    def n(self) -> int:
        return self.user_adj.shape[0]

    @property
    def m(self) -> int:
        return self.attr_adj.shape[1]

    @classmethod
    def from_edges(cls, n: int, m: int, user_edges=(), attr_edges=()) -> "AttributedGraph":
        u = np.zeros((n, n), dtype=bool)
        for i, j in user_edges:
            if i == j:
                raise ValueError(f"self-loop at {i}")
            u[i, j] = u[j, i] = True
        a = np.zeros((n, m), dtype=bool)
        for i, k in attr_edges:
            a[i, k] = True
        return cls(u, a)

    @classmethod
    def empty(cls, n: int, m: int = 0) -> "AttributedGraph":
        return cls(np.zeros((n, n), bool), np.zeros((n, m), bool))

    @classmethod
    def complete(cls, n: int, m: int = 0) -> "AttributedGraph":
        return cls(~np.eye(n, dtype=bool), np.ones((n, m), bool))

    def user_edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self.user_adj, 1))
        return [(int(i), int(j)) for i, j in zip(iu, ju)]

    def attr_edges(self) -> list[tuple[int, int]]:
        return [(int(i), int(a)) for i, a in zip(*np.nonzero(self.attr_adj))]

    def n_user_edges(self) -> int:
        return int(self.user_adj.sum()) // 2

    def n_attr_edges(self) -> int:
        return int(self.attr_adj.sum())

    def user_degrees(self) -> np.ndarray:
        """Degree of each user vertex, counting both user and attribute neighbours."""
        return self.user_adj.sum(1) + self.attr_adj.sum(1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return (
            self.user_adj.shape == other.user_adj.shape
            and self.attr_adj.shape == other.attr_adj.shape
            and np.array_equal(self.user_adj, other.user_adj)
            and np.array_equal(self.attr_adj, other.attr_adj)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.m, self.user_adj.tobytes(), self.attr_adj.tobytes()))

    def __repr__(self) -> str:
        return (
            f"AttributedGraph(n={self.n}, m={self.m}, "
            f"user_edges={self.n_user_edges()}, attr_edges={self.n_attr_edges()})"
        )

    # -- JSON ------------------------------------------------------------------
    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "m": self.m,
            "user_edges": [list(e) for e in self.user_edges()],
            "attr_edges": [list(e) for e in self.attr_edges()],
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "AttributedGraph":
        n, m = int(doc["n"]), int(doc["m"])
        ue = [tuple(e) for e in doc.get("user_edges", [])]
        ae = [tuple(e) for e in doc.get("attr_edges", [])]
        for i, j in ue:
            if not (0 <= i < j < n):
                raise ValueError(f"user edge {[i, j]} must satisfy 0 <= i < j < {n}")
        for i, a in ae:
            if not (0 <= i < n and 0 <= a < m):
                raise ValueError(f"attribute edge {[i, a]} out of range for n={n}, m={m}")
        return cls.from_edges(n, m, ue, ae)


def load_graph(path: str | Path) -> AttributedGraph:
    with open(path) as fh:
        return AttributedGraph.from_json(json.load(fh))


def dump_graph(g: AttributedGraph, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_json(), fh)
        fh.write("\n")


@dataclass(frozen=True, eq=False)
class GraphPair:
    g1: AttributedGraph
    g2: AttributedGraph

    def __post_init__(self):
        if (self.g1.n, self.g1.m) != (self.g2.n, self.g2.m):
            raise DimensionMismatch(
                f"graphs have shapes {(self.g1.n, self.g1.m)} and {(self.g2.n, self.g2.m)}"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphPair):
            return NotImplemented
        return self.g1 == other.g1 and self.g2 == other.g2


def _split_draw(u: np.ndarray, d: JointEdgeDistribution) -> tuple[np.ndarray, np.ndarray]:
    # u < p11 -> (1,1); < p11+p10 -> (1,0); < p11+p10+p01 -> (0,1); else (0,0)
    c1 = d.p11
    c2 = d.p11 + d.p10
    c3 = d.p11 + d.p10 + d.p01
    g1 = u < c2
    g2 = (u < c1) | ((u >= c2) & (u < c3))
    return g1, g2


def sample_pair(params: ModelParams, seed: int | Sequence[int]) -> GraphPair:
    """Draw ``(G1, G2)`` deterministically from ``seed``.

    One uniform is drawn per vertex pair from a counter-based Philox stream
    keyed by ``seed`` (an integer or a sequence of integers).  User pairs
    ``{i<j}`` take counters in row-major order, followed by user–attribute pairs ``(i, a)`` at ``C(n,2) + i*m + a``, so the
    value at each pair depends only on ``seed`` and the pair's canonical index.
    """
    n, m = params.n, params.m
    iu, ju = np.triu_indices(n, 1)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    u = rng.random(len(iu) + n * m)
    ug1, ug2 = _split_draw(u[: len(iu)], params.p_user)
    ag1, ag2 = _split_draw(u[len(iu):], params.q_attr)

    def build(upper, attr):
        adj = np.zeros((n, n), dtype=bool)
        adj[iu, ju] = upper
        adj |= adj.T
        return AttributedGraph(adj, attr.reshape(n, m))

    return GraphPair(build(ug1, ag1), build(ug2, ag2))


def anonymize(g: AttributedGraph, perm: Permutation) -> AttributedGraph:
    """Relabel user vertex ``i`` as ``perm[i]``; attribute vertices stay put."""
    if len(perm) != g.n:
        raise DimensionMismatch(f"permutation of length {len(perm)} for a graph with n={g.n}")
    inv = perm.inverse().as_array()
    return AttributedGraph(g.user_adj[np.ix_(inv, inv)], g.attr_adj[inv])


def intersection(pair: GraphPair) -> AttributedGraph:
    """The graph ``G1 ∧ G2`` holding the edges present in both graphs."""
    return AttributedGraph(
        pair.g1.user_adj & pair.g2.user_adj, pair.g1.attr_adj & pair.g2.attr_adj
    )


def random_positive_dist(rng: np.random.Generator, floor: float = 1e-3) -> JointEdgeDistribution:
    """Uniform draw from the simplex, conditioned on positive correlation and entries ≥ ``floor``."""
    while True:
        x = rng.dirichlet(np.ones(4))
        if x.min() >= floor and x[0] * x[3] > x[1] * x[2]:
            x = x / x.sum()
            x[3] = 1.0 - x[:3].sum()
            return validate(x)
