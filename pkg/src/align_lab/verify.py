"""Self-check suites that compare closed forms with exact or brute-force references."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import bounds, genfunc, indist, oracles
from .alignment import Weights, weights
from .genfunc import (
    WeightExponentPoly,
    a2_closed,
    exact_tail,
    fact3_tail_bound,
    full_pgf,
    lemma4_bound,
    orbit_pgf,
    prob_delta_leq_zero,
)
from .model import ModelParams, random_positive_dist, validate
from .permutation import Permutation, all_permutations

SUITES = ("genfunc", "lemma4", "fact2", "fact3", "converse", "hypergeom")
INJECTIONS = ("psi-sign-flip",)


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    violations: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.checks > 0

    def check(self, ok: bool, note: str = "") -> None:
        self.checks += 1
        if not ok:
            self.violations += 1
            if note and len(self.notes) < 10:
                self.notes.append(note)

    def to_dict(self) -> dict:
        return {"suite": self.name, "checks": self.checks, "violations": self.violations,
                "passed": self.passed, "notes": self.notes}


def _flipped_psi(dist) -> float:
    d = validate(dist)
    return (math.sqrt(d.p11 * d.p00) + math.sqrt(d.p10 * d.p01)) ** 2


def _weights_of(p, q) -> Weights:
    return weights(ModelParams(1, 0, p, q))


def suite_genfunc(rng: np.random.Generator) -> SuiteResult:
    res = SuiteResult("genfunc")
    dists = [validate([[0.3, 0.1], [0.1, 0.5]])] + [random_positive_dist(rng) for _ in range(2)]
    for d in dists:
        for l in range(1, 6):
            ref = oracles.naive_orbit_law(l, d)
            got = orbit_pgf(l, d)
            ok = got.allclose(WeightExponentPoly({(a, 0): c for a, c in ref.items()}))
            res.check(ok and got.is_pgf(), f"orbit law l={l} differs from enumeration")
        w = _weights_of(d, d)
        a2 = orbit_pgf(2, d)
        for z in rng.uniform(0.05, 3.0, 20):
            res.check(abs(a2.evaluate(z, w.w1, w.w2) - a2_closed(d, "user", z, w)) <= 1e-12,
                      f"size-two closed form mismatch at z={z}")
    for n in (2, 3):
        for m in (0, 1):
            p, q = random_positive_dist(rng), random_positive_dist(rng)
            params = ModelParams(n, m, p, q)
            for row in all_permutations(n):
                perm = Permutation(row)
                ref = WeightExponentPoly(oracles.brute_delta_law(perm, params))
                res.check(full_pgf(perm, params).allclose(ref),
                          f"full law mismatch n={n} m={m} perm={perm.cycle_notation()}")
    return res


def suite_lemma4(rng: np.random.Generator, psi_fn: Callable = genfunc.psi) -> SuiteResult:
    res = SuiteResult("lemma4")
    cases = [ModelParams(2, 1, validate([0.25, 0.25, 0.25, 0.25]), validate([[0.3, 0.1], [0.1, 0.5]]))]
    for n in (2, 3, 4):
        for m in (0, 1, 2):
            cases.append(ModelParams(n, m, random_positive_dist(rng), random_positive_dist(rng)))
    for params in cases:
        try:
            w = _weights_of(params.p_user, params.q_attr)
        except Exception:
            # uniform user part at n=2 never enters δ; any positive weight works
            w = Weights(1.0, _weights_of(params.q_attr, params.q_attr).w2)
        for row in all_permutations(params.n):
            perm = Permutation(row)
            if perm.is_identity():
                continue
            exact = prob_delta_leq_zero(full_pgf(perm, params), w)
            try:
                bound = lemma4_bound(params.n, perm.n_moved, params.m,
                                     psi_fn(params.p_user), psi_fn(params.q_attr))
            except Exception as exc:
                res.check(False, f"bound failed: {exc}")
                continue
            res.check(bound >= exact - 1e-12,
                      f"n={params.n} m={params.m} {perm.cycle_notation()}: bound {bound:.6g} < exact {exact:.6g}")
    return res


def suite_fact2(rng: np.random.Generator, count: int = 100) -> SuiteResult:
    res = SuiteResult("fact2")
    zs = (math.exp(-0.25), 0.5, 0.9, 1.1)
    for i in range(count):
        d = random_positive_dist(rng)
        l = 3 + i % 4
        w = _weights_of(d, d)
        for kind in ("user", "attr"):
            poly = orbit_pgf(l, d, kind)
            for z in zs:
                lhs = poly.evaluate(z, w.w1, w.w2)
                rhs = a2_closed(d, kind, z, w) ** (l / 2)
                res.check(lhs <= rhs * (1 + 1e-12), f"l={l} z={z}: {lhs} > {rhs}")
    return res


def random_pgf(rng: np.random.Generator, max_terms: int = 8, span: int = 5) -> WeightExponentPoly:
    k = int(rng.integers(1, max_terms + 1))
    keys = {(int(a), int(b)) for a, b in rng.integers(-span, span + 1, size=(k, 2))}
    coefs = rng.dirichlet(np.ones(len(keys)))
    return WeightExponentPoly(dict(zip(sorted(keys), coefs)))


def suite_fact3(rng: np.random.Generator, count: int = 100) -> SuiteResult:
    res = SuiteResult("fact3")
    for _ in range(count):
        poly = random_pgf(rng)
        w = Weights(*rng.uniform(0.2, 3.0, 2))
        vals = [a * w.w1 + b * w.w2 for a, b in poly.terms]
        j = float(rng.choice(vals)) if rng.random() < 0.5 else float(rng.uniform(min(vals) - 1, max(vals) + 1))
        for direction, z in (
            ("point", float(rng.uniform(0.05, 3.0))),
            ("leq", float(rng.uniform(0.05, 1.0))),
            ("geq", float(rng.uniform(1.0, 3.0))),
        ):
            bound = fact3_tail_bound(poly, w, z, j, direction)
            exact = exact_tail(poly, w, j, direction)
            res.check(bound >= exact * (1 - 1e-12), f"{direction} j={j} z={z}: {bound} < {exact}")
    return res


def suite_converse(rng: np.random.Generator) -> SuiteResult:
    res = SuiteResult("converse")
    for n, m in ((4, 0), (4, 1), (5, 0)):
        for p11, q11 in ((0.5, 0.5), (0.3, 0.2)):
            ref = oracles.brute_equiv_probs(n, m, p11, q11)
            got = (indist.p_equiv_pair(n, m, p11, q11), indist.p_equiv_triple(n, m, p11, q11),
                   indist.p_equiv_two_pairs(n, m, p11, q11))
            for name, a, b in zip(("pair", "triple", "two-pair"), got, ref):
                res.check(abs(a - b) <= 1e-12, f"{name} n={n} m={m} p={p11}: {a} vs {b}")
    for n, m, p11, q11 in ((10, 0, 0.05, 0.0), (8, 2, 0.3, 0.3), (6, 1, 0.2, 0.4)):
        got = indist.chebyshev_p_x_zero(n, m, p11, q11)
        ex = math.comb(n, 2) * indist.p_equiv_pair(n, m, p11, q11)
        ex2 = (math.comb(n, 2) * indist.p_equiv_pair(n, m, p11, q11)
               + n * (n - 1) * (n - 2) * indist.p_equiv_triple(n, m, p11, q11)
               + math.comb(n, 2) * math.comb(n - 2, 2) * indist.p_equiv_two_pairs(n, m, p11, q11))
        ref = min(1.0, max(0.0, (ex2 - ex * ex) / ex ** 2))
        res.check(abs(got - ref) <= 1e-9, f"second-moment bound n={n}: {got} vs {ref}")
    return res


def suite_hypergeom(rng: np.random.Generator, count: int = 50) -> SuiteResult:
    res = SuiteResult("hypergeom")
    for _ in range(count):
        n, perm, r, z = random_hyp_tuple(rng)
        N = n * (n - 1) // 2
        K = genfunc.induced_orbits(perm, n, 0).t_tilde_user
        exact = bounds.hyp_pgf_exact(r, N, K, z)
        b1 = bounds.bin_pgf(r, N, K, z)
        b2 = bounds.hyp_pgf_bound(r, n, perm.n_moved, z)
        res.check(exact <= b1 * (1 + 1e-12), f"binomial PGF below exact at r={r} N={N} K={K} z={z}")
        res.check(exact <= b2 * (1 + 1e-12), f"exponential bound below exact at r={r} n={n} z={z}")
    for _ in range(count):
        t = int(rng.integers(1, 60))
        r = int(rng.integers(0, t + 1))
        p = Fraction(int(rng.integers(1, 99)), 100)
        res.check(bounds.binomial_lower_bound_holds(t, r, p), f"binomial lower bound t={t} r={r} p={p}")
    return res


def random_hyp_tuple(rng: np.random.Generator) -> tuple[int, Permutation, int, float]:
    """``(n, π, r, z)`` with π moving at least two vertices, ``r ≤ C(n,2)`` and ``z ∈ (0, 1)``."""
    n = int(rng.integers(3, 16))
    while True:
        perm = Permutation(rng.permutation(n))
        if not perm.is_identity():
            break
    r = int(rng.integers(0, n * (n - 1) // 2 + 1))
    return n, perm, r, float(rng.uniform(0.01, 0.99))


def run_suites(names=None, seed: int = 0, inject: Optional[str] = None) -> list[SuiteResult]:
    names = list(names or SUITES)
    unknown = set(names) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suite(s): {sorted(unknown)}")
    if inject is not None and inject not in INJECTIONS:
        raise ValueError(f"unknown injection {inject!r}")
    psi_fn = _flipped_psi if inject == "psi-sign-flip" else genfunc.psi
    out = []
    for i, name in enumerate(SUITES):
        if name not in names:
            continue
        rng = np.random.default_rng([seed, i])
        if name == "lemma4":
            out.append(suite_lemma4(rng, psi_fn))
        else:
            out.append(globals()[f"suite_{name}"](rng))
    return out
