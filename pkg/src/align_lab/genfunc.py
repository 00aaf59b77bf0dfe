"""Exact laws of the weighted-distance excess δ_π via orbit generating functions.

The permutation induced on vertex pairs splits them into orbits.  Edge
indicators on different orbits are independent, so the law of δ_π factors
into one polynomial per orbit.  Polynomials are stored as maps from integer
exponent pairs ``(a, b)`` to coefficients, denoting ``Σ c · z^(a·w1 + b·w2)``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Literal, Mapping

import numpy as np

from .errors import LTooLarge, OrbitTooLarge, PsiOutOfRange, ZOutOfRange
from .model import JointEdgeDistribution, ModelParams, validate
from .permutation import Permutation

Kind = Literal["user", "attr"]
MAX_ORBIT = 12
COEF_TOL = 1e-12
PGF_TOL = 1e-9
ZERO_TOL = 1e-12


# ---------------------------------------------------------------------------
# joint-indicator counts


@dataclass(frozen=True, eq=False)
class MuNuCounts:
    """Joint indicator counts ``mu[g][h]`` (user pairs) and ``nu[g][h]`` (attribute pairs)."""

    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        for name in ("mu", "nu"):
            arr = np.array(getattr(self, name), dtype=np.int64).reshape(2, 2)
            if np.any(arr < 0):
                raise ValueError(f"{name} has a negative count")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_user_pairs(self) -> int:
        return int(self.mu.sum())

    @property
    def n_attr_pairs(self) -> int:
        return int(self.nu.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, MuNuCounts):
            return NotImplemented
        return np.array_equal(self.mu, other.mu) and np.array_equal(self.nu, other.nu)

    @classmethod
    def from_arrays(cls, g_user, h_user, g_attr, h_attr) -> "MuNuCounts":
        """Count states over paired indicator arrays (any matching shapes)."""

        def tally(g, h):
            g = np.asarray(g, dtype=bool).ravel()
            h = np.asarray(h, dtype=bool).ravel()
            return [
                [int(np.sum(~g & ~h)), int(np.sum(~g & h))],
                [int(np.sum(g & ~h)), int(np.sum(g & h))],
            ]

        return cls(np.array(tally(g_user, h_user)), np.array(tally(g_attr, h_attr)))


# ---------------------------------------------------------------------------
# orbits


@dataclass(frozen=True)
class OrbitDecomposition:
    """Orbits of the induced action on user pairs ``{u, v}`` and attribute pairs ``(u, a)``.

    Each orbit is listed in traversal order: the pair at position ``k+1`` is
    the image of the pair at position ``k``.
    """

    n: int
    m: int
    user_orbits: tuple[tuple[tuple[int, int], ...], ...]
    attr_orbits: tuple[tuple[tuple[int, int], ...], ...]
    n_moved: int

    @property
    def orbits(self) -> list[tuple[Kind, tuple[tuple[int, int], ...]]]:
        return [("user", o) for o in self.user_orbits] + [("attr", o) for o in self.attr_orbits]

    @staticmethod
    def _size_counts(orbits) -> dict[int, int]:
        out: dict[int, int] = defaultdict(int)
        for o in orbits:
            out[len(o)] += 1
        return dict(sorted(out.items()))

    @property
    def t_l_user(self) -> dict[int, int]:
        return self._size_counts(self.user_orbits)

    @property
    def t_l_attr(self) -> dict[int, int]:
        return self._size_counts(self.attr_orbits)

    @property
    def t_user(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def t_attr(self) -> int:
        return self.n * self.m

    @property
    def t1_user(self) -> int:
        return self.t_l_user.get(1, 0)

    @property
    def t1_attr(self) -> int:
        return self.t_l_attr.get(1, 0)

    @property
    def t_tilde_user(self) -> int:
        """Size of the moving user-pair set."""
        return self.t_user - self.t1_user

    @property
    def t_tilde_attr(self) -> int:
        return self.t_attr - self.t1_attr

    @property
    def max_orbit(self) -> int:
        sizes = [len(o) for o in self.user_orbits + self.attr_orbits]
        return max(sizes, default=1)

    def moving_pairs(self) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
        """Pairs lying on orbits of size at least two."""
        mu = [e for o in self.user_orbits if len(o) > 1 for e in o]
        ma = [e for o in self.attr_orbits if len(o) > 1 for e in o]
        return mu, ma


def _traverse(start, step, seen) -> tuple:
    orbit = []
    e = start
    while e not in seen:
        seen.add(e)
        orbit.append(e)
        e = step(e)
    return tuple(orbit)


def induced_orbits(perm: Permutation, n: int, m: int) -> OrbitDecomposition:
    if len(perm) != n:
        raise ValueError(f"permutation of length {len(perm)} for n={n}")
    pi = perm.mapping

    def step_user(e):
        a, b = pi[e[0]], pi[e[1]]
        return (a, b) if a < b else (b, a)

    seen: set = set()
    user = []
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in seen:
                user.append(_traverse((i, j), step_user, seen))
    seen = set()
    attr = []
    for i in range(n):
        for a in range(m):
            if (i, a) not in seen:
                attr.append(_traverse((i, a), lambda e: (pi[e[0]], e[1]), seen))
    return OrbitDecomposition(n, m, tuple(user), tuple(attr), perm.n_moved)


# ---------------------------------------------------------------------------
# Laurent polynomials in z^w1, z^w2


class WeightExponentPoly:
    """Finite sum ``Σ c · z^(a·w1 + b·w2)`` with integer ``a, b``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], float] | None = None):
        self.terms: dict[tuple[int, int], float] = {}
        for k, c in (terms or {}).items():
            if c != 0:
                self.terms[(int(k[0]), int(k[1]))] = float(c)

    @classmethod
    def one(cls) -> "WeightExponentPoly":
        return cls({(0, 0): 1.0})

    def __mul__(self, other: "WeightExponentPoly") -> "WeightExponentPoly":
        out: dict[tuple[int, int], float] = defaultdict(float)
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                out[(a1 + a2, b1 + b2)] += c1 * c2
        return WeightExponentPoly(out)

    def __pow__(self, k: int) -> "WeightExponentPoly":
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = WeightExponentPoly.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightExponentPoly):
            return NotImplemented
        return self.allclose(other, 0.0)

    def allclose(self, other: "WeightExponentPoly", tol: float = COEF_TOL) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0)) <= tol for k in keys)

    def __repr__(self) -> str:
        return f"WeightExponentPoly({len(self.terms)} terms)"

    def total(self) -> float:
        return math.fsum(self.terms.values())

    def is_pgf(self, tol: float = PGF_TOL) -> bool:
        return all(c >= 0 for c in self.terms.values()) and abs(self.total() - 1.0) <= tol

    def exponent(self, key: tuple[int, int], w1: float, w2: float) -> float:
        return key[0] * w1 + key[1] * w2

    def evaluate(self, z: float, w1: float, w2: float) -> float:
        """Value at a positive real ``z``."""
        if z <= 0:
            raise ZOutOfRange(f"z must be positive, got {z}")
        lz = math.log(z)
        return math.fsum(c * math.exp((a * w1 + b * w2) * lz) for (a, b), c in self.terms.items())

    def mass(self, pred, w1: float, w2: float) -> float:
        """Sum of coefficients whose exponent value satisfies ``pred``."""
        return math.fsum(c for (a, b), c in self.terms.items() if pred(a * w1 + b * w2))

    def dump(self) -> list[tuple[tuple[int, int], float]]:
        """Terms sorted lexicographically by exponent pair."""
        return sorted(self.terms.items())


# ---------------------------------------------------------------------------
# orbit generating functions


def _popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x).astype(np.int64)


def orbit_pgf(l: int, dist: JointEdgeDistribution, kind: Kind = "user") -> WeightExponentPoly:
    """Law of one orbit's contribution to δ_π, by enumerating all 4^l assignments.

    Along an orbit ``e_0 → e_1 → … → e_{l-1} → e_0`` the contribution is
    ``Σ_k 1{g_k ≠ h_{k+1}} − 1{g_k ≠ h_k}`` (indices mod ``l``), in units of
    the weight of ``kind``.
    """
    if kind not in ("user", "attr"):
        raise ValueError(f"kind must be 'user' or 'attr', got {kind!r}")
    if l < 1:
        raise ValueError("orbit length must be positive")
    if l > MAX_ORBIT:
        raise LTooLarge(f"orbit length {l} exceeds enumeration cap {MAX_ORBIT}")
    dist = validate(dist)
    mask = (1 << l) - 1
    states = np.arange(1 << l, dtype=np.uint32)
    # h rotated by one: bit k holds h_{k+1}
    h_rot = ((states >> 1) | ((states & 1) << (l - 1))) & mask
    h = states[None, :]
    # integer counts keyed by (excess, n11, n10, n01), packed base 16
    width = 2 * l + 1
    counts = np.zeros(width * 16 ** 3, dtype=np.int64)
    chunk = max(1, (1 << 22) >> l)
    for lo in range(0, 1 << l, chunk):
        g = states[lo : lo + chunk, None]
        excess = _popcount(g ^ h_rot[None, :]) - _popcount(g ^ h)
        n11 = _popcount(g & h)
        n10 = _popcount(g & ~h & mask)
        n01 = _popcount(~g & h & mask)
        key = (((excess + l) * 16 + n11) * 16 + n10) * 16 + n01
        counts += np.bincount(key.ravel(), minlength=counts.size)
    out: dict[tuple[int, int], float] = defaultdict(float)
    for idx in np.flatnonzero(counts).tolist():
        c01 = idx % 16
        c10 = (idx // 16) % 16
        c11 = (idx // 256) % 16
        a = idx // 4096 - l
        c00 = l - c11 - c10 - c01
        prob = int(counts[idx]) * (dist.p11 ** c11) * (dist.p10 ** c10) * (dist.p01 ** c01) * (dist.p00 ** c00)
        k = (a, 0) if kind == "user" else (0, a)
        out[k] += prob
    return WeightExponentPoly(out)


def a2_closed(dist: JointEdgeDistribution, kind: Kind, z: float, w) -> float:
    """Closed form of the size-two orbit generating function at ``z``."""
    if z <= 0:
        raise ZOutOfRange(f"z must be positive, got {z}")
    d = validate(dist)
    wt = w.w1 if kind == "user" else w.w2
    return 1 + 2 * d.p11 * d.p00 * (z ** (2 * wt) - 1) + 2 * d.p10 * d.p01 * (z ** (-2 * wt) - 1)


def psi(dist: JointEdgeDistribution) -> float:
    """``(√(d11·d00) − √(d10·d01))²``."""
    d = validate(dist)
    return (math.sqrt(d.p11 * d.p00) - math.sqrt(d.p10 * d.p01)) ** 2


def full_pgf(perm: Permutation, params: ModelParams) -> WeightExponentPoly:
    """Exact law of δ_π(G1, G2) as a product of orbit generating functions."""
    dec = induced_orbits(perm, params.n, params.m)
    if dec.max_orbit > MAX_ORBIT:
        raise OrbitTooLarge(f"an orbit has size {dec.max_orbit} > {MAX_ORBIT}")
    poly = WeightExponentPoly.one()
    for l, cnt in dec.t_l_user.items():
        if l > 1:
            poly = poly * orbit_pgf(l, params.p_user, "user") ** cnt
    for l, cnt in dec.t_l_attr.items():
        if l > 1:
            poly = poly * orbit_pgf(l, params.q_attr, "attr") ** cnt
    return poly


def prob_delta_leq_zero(poly: WeightExponentPoly, w) -> float:
    """Total mass at exponents ``a·w1 + b·w2 ≤ 0`` (zero included up to 1e-12)."""
    return poly.mass(lambda d: d <= ZERO_TOL, w.w1, w.w2)


def _check_psi(*vals: float) -> None:
    for v in vals:
        if not (0 <= v < 0.5) or math.isnan(v):
            raise PsiOutOfRange(f"psi={v} must lie in [0, 1/2)")


def lemma4_bound(n: int, n_moved: int, m: int, psi_u: float, psi_a: float) -> float:
    """``(1−2ψu)^(ñ(n−2)/4) · (1−2ψa)^(ñm/2)``, a bound on P(δ_π ≤ 0) for π moving ñ vertices."""
    _check_psi(psi_u, psi_a)
    return (1 - 2 * psi_u) ** (n_moved * (n - 2) / 4) * (1 - 2 * psi_a) ** (n_moved * m / 2)


def fact3_tail_bound(
    poly: WeightExponentPoly, w, z: float, j: float, direction: Literal["leq", "geq", "point"]
) -> float:
    """``z^(−j) Φ(z)``, which bounds the mass at ``j``, at most ``j`` or at least ``j``.

    The lower-tail form needs ``0 < z ≤ 1`` and the upper-tail form ``z ≥ 1``.
    """
    if direction == "point":
        ok = z > 0
    elif direction == "leq":
        ok = 0 < z <= 1
    elif direction == "geq":
        ok = z >= 1
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if not ok:
        raise ZOutOfRange(f"z={z} is not admissible for direction {direction!r}")
    return z ** (-j) * poly.evaluate(z, w.w1, w.w2)


def exact_tail(poly: WeightExponentPoly, w, j: float, direction: str) -> float:
    """Exact mass at/below/above ``j`` for comparison with :func:`fact3_tail_bound`."""
    if direction == "point":
        return poly.mass(lambda d: abs(d - j) <= ZERO_TOL, w.w1, w.w2)
    if direction == "leq":
        return poly.mass(lambda d: d <= j + ZERO_TOL, w.w1, w.w2)
    return poly.mass(lambda d: d >= j - ZERO_TOL, w.w1, w.w2)
