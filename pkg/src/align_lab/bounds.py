"""Finite-n margins, region labels, union bounds and sparse-regime bound pieces.

Asymptotic conditions of the form ``f(n) → ±∞`` become signed margins
``f(n)`` evaluated at one instance; a region label compares them with a
user slack ``eps``.  Natural logarithms throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .errors import DegenerateInput, PsiOutOfRange
from .genfunc import psi
from .model import ModelParams

REGIONS = ("R1", "R2", "R3", "R4", "UNDETERMINED")
DEFAULT_C_RSTAR = math.e + 1.01


def thm1_value(n: float, m: float, p11: float, psi_a: float) -> float:
    return n * p11 + m * psi_a - math.log(n)


def lemma2_value(n: float, m: float, psi_u: float, psi_a: float) -> float:
    return n * psi_u / 2 + m * psi_a - math.log(n)


def converse_value(n: float, m: float, p11: float, q11: float) -> float:
    return n * p11 + m * q11 - math.log(n)


def margin_thm1(params: ModelParams) -> float:
    """``n·p11 + m·ψa − ln n``."""
    return thm1_value(params.n, params.m, params.p_user.p11, psi(params.q_attr))


def margin_lemma2(params: ModelParams) -> float:
    """``n·ψu/2 + m·ψa − ln n``."""
    return lemma2_value(params.n, params.m, psi(params.p_user), psi(params.q_attr))


def margin_converse(params: ModelParams) -> float:
    """``n·p11 + m·q11 − ln n``; very negative values rule out exact alignment."""
    return converse_value(params.n, params.m, params.p_user.p11, params.q_attr.p11)


def margin_corollary(params: ModelParams, c: float = 1.0) -> float:
    """``n·p11 + m·q11 − c·m·q11^(3/2) − ln n`` with the unspecified constant exposed as ``c``."""
    q11 = params.q_attr.p11
    return margin_converse(params) - c * params.m * q11 ** 1.5


def sparse_checks(params: ModelParams) -> dict[str, float]:
    """Ratios whose growth or decay the sparse-regime achievability result assumes."""
    p = params.p_user
    ln = math.log(params.n)
    out = {
        "p11_n_over_log_n": p.p11 * params.n / ln if ln > 0 else math.inf,
        "cross_times_log_n": (p.p10 + p.p01) * ln,
    }
    denom = p.p11 * p.p00
    out["cross_ratio_log_n_cubed"] = (p.p10 * p.p01 / denom) * ln ** 3 if denom > 0 else math.inf
    return out


def classify_region(params: ModelParams, eps: float = 0.0) -> str:
    n, m = params.n, params.m
    ln = math.log(n)
    p11 = params.p_user.p11
    if n * p11 - ln > eps:
        return "R1"
    conv = margin_converse(params)
    if conv < -eps:
        return "R4"
    if m == 0:
        return "UNDETERMINED"
    q11 = params.q_attr.p11
    cut = m ** (-2.0 / 3.0)
    if q11 <= cut and conv > eps:
        return "R2"
    if q11 > cut and margin_thm1(params) > eps:
        return "R3"
    return "UNDETERMINED"


@dataclass(frozen=True)
class MarginReport:
    n: int
    m: int
    psi_u: float
    psi_a: float
    margin_thm1: float
    margin_lemma2: float
    margin_converse: float
    margin_corollary: float
    corollary_constant: float
    eps: float
    region: str
    union_bound: float
    sparse_checks: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.region not in REGIONS:
            raise ValueError(f"unknown region {self.region!r}")
        if self.region == "R4" and not self.margin_converse < 0:
            raise ValueError("region R4 requires a negative converse margin")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def margin_report(params: ModelParams, eps: float = 0.0, corollary_c: float = 1.0) -> MarginReport:
    return MarginReport(
        n=params.n,
        m=params.m,
        psi_u=psi(params.p_user),
        psi_a=psi(params.q_attr),
        margin_thm1=margin_thm1(params),
        margin_lemma2=margin_lemma2(params),
        margin_converse=margin_converse(params),
        margin_corollary=margin_corollary(params, corollary_c),
        corollary_constant=corollary_c,
        eps=eps,
        region=classify_region(params, eps),
        union_bound=union_bound_error(params),
        sparse_checks=sparse_checks(params),
    )


# ---------------------------------------------------------------------------
# union bound over all non-identity permutations


def union_ratio(n: int, m: int, psi_u: float, psi_a: float) -> float:
    """``n (1−2ψu)^((n−2)/4) (1−2ψa)^(m/2)``, the per-moved-vertex ratio of the series."""
    for v in (psi_u, psi_a):
        if not 0 <= v < 0.5:
            raise PsiOutOfRange(f"psi={v} must lie in [0, 1/2)")
    return n * (1 - 2 * psi_u) ** ((n - 2) / 4) * (1 - 2 * psi_a) ** (m / 2)


def geometric_tail(rho: float) -> float:
    """``Σ_{k≥2} ρ^k = ρ²/(1−ρ)``, or ``inf`` when the series diverges."""
    return rho * rho / (1 - rho) if rho < 1 else math.inf


def union_bound_error(params: ModelParams) -> float:
    """Bound on P(some π ≠ id has δ_π ≤ 0); ``inf`` when vacuous."""
    rho = union_ratio(params.n, params.m, psi(params.p_user), psi(params.q_attr))
    return geometric_tail(rho)


# ---------------------------------------------------------------------------
# sparse regime


@dataclass(frozen=True)
class SparseBoundInputs:
    r: int
    r_tilde: int
    n: int
    m: int
    t_user: int
    t_tilde_user: int
    C_trunc: float = 0.0
    C_rstar: float = DEFAULT_C_RSTAR

    def __post_init__(self):
        if not 0 <= self.r_tilde <= self.r <= self.t_user:
            raise DegenerateInput(
                f"need 0 <= r_tilde <= r <= t_user, got {self.r_tilde}, {self.r}, {self.t_user}"
            )
        if self.n < 1 or self.m < 0:
            raise DegenerateInput(f"invalid sizes n={self.n}, m={self.m}")

    @classmethod
    def for_graph(cls, n: int, m: int, r: int, r_tilde: int, t_tilde_user: int, **kw) -> "SparseBoundInputs":
        return cls(r, r_tilde, n, m, n * (n - 1) // 2, t_tilde_user, **kw)


def tilted_x11(inp: SparseBoundInputs, p_dist) -> float:
    """``(r̃ ln n + p11 t̃)(1 − p11)/(p11 t̃)``, the tilted co-occurrence weight."""
    p11 = p_dist.p11
    t = inp.t_tilde_user
    if t <= 0 or not 0 < p11 < 1:
        raise DegenerateInput(f"need t_tilde_user > 0 and 0 < p11 < 1, got {t}, {p11}")
    return (inp.r_tilde * math.log(inp.n) + p11 * t) * (1 - p11) / (p11 * t)


def r_tilde_star(inp: SparseBoundInputs) -> float:
    """Truncation point ``C · r · t̃ / t`` (``C`` times the conditional mean of R̃)."""
    return inp.C_rstar * inp.r * inp.t_tilde_user / inp.t_user


def hyp_pgf_exact(r: int, N: int, K: int, z: float) -> float:
    """PGF at ``z`` of the number of marked items when drawing ``r`` of ``N`` with ``K`` marked."""
    if not (0 <= K <= N and 0 <= r <= N):
        raise DegenerateInput(f"invalid hypergeometric parameters r={r}, N={N}, K={K}")
    total = math.comb(N, r)
    lo, hi = max(0, r - (N - K)), min(r, K)
    zf = Fraction(z)
    acc = sum(
        Fraction(math.comb(K, k) * math.comb(N - K, r - k), total) * zf ** k for k in range(lo, hi + 1)
    )
    return float(acc)


def bin_pgf(r: int, N: int, K: int, z: float) -> float:
    """PGF of ``Bin(r, K/N)`` at ``z``."""
    return (1 + K / N * (z - 1)) ** r


def hyp_pgf_bound(r: int, n: int, n_moved: int, z: float) -> float:
    """``exp{(r ñ/n)(−2 + e/(n−1) + 2 e z)}``."""
    if n < 2 or z <= 0:
        raise DegenerateInput(f"need n >= 2 and z > 0, got n={n}, z={z}")
    log_val = r * n_moved / n * (-2 + math.e / (n - 1) + 2 * math.e * z)
    return math.exp(log_val) if log_val < 709 else math.inf


def truncated_union_bound(inp: SparseBoundInputs, psi_a: float) -> float:
    """``min(1, 3 n² z6²)`` with ``z6 = exp{−2r/n + (m/2) ln(1−2ψa) + C}``."""
    if not 0 <= psi_a < 0.5:
        raise PsiOutOfRange(f"psi_a={psi_a} must lie in [0, 1/2)")
    log_z6 = -2 * inp.r / inp.n + inp.m / 2 * math.log(1 - 2 * psi_a) + inp.C_trunc
    log_val = math.log(3) + 2 * math.log(inp.n) + 2 * log_z6
    return 1.0 if log_val >= 0 else math.exp(log_val)


def binomial_lower_bound_holds(t: int, r: int, p: Fraction) -> bool:
    """Exact check of ``C(t,r) p^r (1−p)^(t−r) ≥ (t p / (r (1−p)))^r (1−p)^t``."""
    p = Fraction(p)
    if not (0 <= r <= t) or not (0 < p < 1):
        raise DegenerateInput(f"need 0 <= r <= t and 0 < p < 1, got r={r}, t={t}, p={p}")
    lhs = math.comb(t, r) * p ** r * (1 - p) ** (t - r)
    rhs = (Fraction(t) * p / (r * (1 - p))) ** r * (1 - p) ** t if r else (1 - p) ** t
    return lhs >= rhs
