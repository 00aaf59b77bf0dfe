"""Monte Carlo estimates and phase sweeps.

Every trial draws from its own seed ``SeedSequence([master, cell, trial, stream])``,
so results do not depend on how trials are scheduled or how many workers run.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .alignment import DEFAULT_CAP, _argmin_rows, mismatch_table, weights
from .bounds import classify_region, margin_converse, margin_lemma2, margin_thm1
from .errors import AlignLabError, NTooLarge
from .indist import batch_equiv_stats, count_indistinguishable
from .model import JointEdgeDistribution, ModelParams, anonymize, intersection, sample_pair, validate
from .permutation import Permutation, all_permutations

CSV_COLUMNS = (
    "n", "m", "p11", "p10", "p01", "p00", "q11", "q10", "q01", "q00",
    "trials", "successes", "success_rate", "ci_low", "ci_high",
    "margin_thm1", "margin_lemma2", "margin_converse", "region",
)
DEFAULT_TRIALS = 2000
STREAM_GRAPH, STREAM_PERM, STREAM_TIE = 0, 1, 2


def wilson(successes: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    lo, hi = proportion_confint(successes, trials, alpha=alpha, method="wilson")
    return float(lo), float(hi)


def trial_seed(master: int, cell: int, trial: int, stream: int) -> list[int]:
    return [int(master), int(cell), int(trial), int(stream)]


@dataclass(frozen=True)
class CellResult:
    params: ModelParams
    trials: int
    successes: int
    success_rate: float
    ci_low: float
    ci_high: float
    margin_thm1: float
    margin_lemma2: float
    margin_converse: float
    region: str
    tie_break_successes: int = 0
    x_zero_trials: int = 0
    mean_success_cap: float = float("nan")

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ValueError("successes out of range")
        if not self.ci_low - 1e-12 <= self.success_rate <= self.ci_high + 1e-12:
            raise ValueError("confidence interval does not contain the point estimate")

    @property
    def tie_break_rate(self) -> float:
        return self.tie_break_successes / self.trials

    @property
    def x_zero_rate(self) -> float:
        return self.x_zero_trials / self.trials

    def csv_row(self) -> list[str]:
        p, q = self.params.p_user, self.params.q_attr
        f = lambda x: format(float(x), ".9g")
        return [
            str(self.params.n), str(self.params.m),
            *(f(v) for v in p.quad), *(f(v) for v in q.quad),
            str(self.trials), str(self.successes), f(self.success_rate),
            f(self.ci_low), f(self.ci_high),
            f(self.margin_thm1), f(self.margin_lemma2), f(self.margin_converse),
            self.region,
        ]

    def to_dict(self) -> dict[str, Any]:
        d = {k: v for k, v in zip(CSV_COLUMNS, self.csv_row())}
        d.update(
            n=self.params.n, m=self.params.m, trials=self.trials, successes=self.successes,
            success_rate=self.success_rate, ci_low=self.ci_low, ci_high=self.ci_high,
            margin_thm1=self.margin_thm1, margin_lemma2=self.margin_lemma2,
            margin_converse=self.margin_converse,
            tie_break_successes=self.tie_break_successes, tie_break_rate=self.tie_break_rate,
            x_zero_trials=self.x_zero_trials, mean_success_cap=self.mean_success_cap,
        )
        for k in ("p11", "p10", "p01", "p00"):
            d[k] = getattr(self.params.p_user, k)
            d["q" + k[1:]] = getattr(self.params.q_attr, k)
        return d


def _alignment_trial(params, perms, w1, w2, master, cell, trial):
    n = params.n
    pair = sample_pair(params, trial_seed(master, cell, trial, STREAM_GRAPH))
    truth = Permutation.random(n, trial_seed(master, cell, trial, STREAM_PERM))
    g2p = anonymize(pair.g2, truth)
    du, da = mismatch_table(pair.g1.user_adj, pair.g1.attr_adj, g2p.user_adj, g2p.attr_adj, perms)
    idx, _ = _argmin_rows(w1 * du + w2 * da)
    t = truth.as_array()
    ok = len(idx) == 1 and np.array_equal(perms[idx[0]], t)
    pick = idx[int(np.random.default_rng(trial_seed(master, cell, trial, STREAM_TIE)).integers(len(idx)))]
    tie_ok = bool(np.array_equal(perms[pick], t))
    x = count_indistinguishable(intersection(pair)).x_count
    return ok, tie_ok, x


def mc_alignment_success(
    params: ModelParams, trials: int, seed: int, cap: int = DEFAULT_CAP, cell: int = 0
) -> CellResult:
    """Empirical probability that exhaustive MAP recovers the anonymizing permutation.

    Ties count as failures; a uniform tie-break success count and the
    indistinguishable-pair statistics of each trial's intersection graph are
    reported alongside.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if params.n > cap:
        raise NTooLarge(f"n={params.n} exceeds the exhaustive-search cap {cap}")
    w = weights(params)
    perms = all_permutations(params.n)
    succ = tie = xzero = 0
    cap_sum = 0.0
    for t in range(trials):
        ok, tie_ok, x = _alignment_trial(params, perms, w.w1, w.w2, seed, cell, t)
        succ += ok
        tie += tie_ok
        xzero += x == 0
        cap_sum += 1.0 / (x + 1)
    lo, hi = wilson(succ, trials)
    return CellResult(
        params=params,
        trials=trials,
        successes=succ,
        success_rate=succ / trials,
        ci_low=lo,
        ci_high=hi,
        margin_thm1=margin_thm1(params),
        margin_lemma2=margin_lemma2(params),
        margin_converse=margin_converse(params),
        region=classify_region(params),
        tie_break_successes=tie,
        x_zero_trials=xzero,
        mean_success_cap=cap_sum / trials,
    )


@dataclass(frozen=True)
class EventEstimate:
    hits: int
    trials: int
    ci_low: float
    ci_high: float

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1 - p) / self.trials)


def mc_delta_event(params: ModelParams, perm: Permutation, trials: int, seed: int) -> EventEstimate:
    """Empirical P(δ_π ≤ 0) over fresh graph pairs (no anonymization)."""
    w = weights(params)
    n = params.n
    p = perm.as_array()
    iu, ju = np.triu_indices(n, 1)
    pu, pv = p[iu], p[ju]
    hits = 0
    for t in range(trials):
        pair = sample_pair(params, trial_seed(seed, 0, t, STREAM_GRAPH))
        g1u, g2u = pair.g1.user_adj, pair.g2.user_adj
        g1a, g2a = pair.g1.attr_adj, pair.g2.attr_adj
        a = int((g1u[iu, ju] != g2u[pu, pv]).sum() - (g1u[iu, ju] != g2u[iu, ju]).sum())
        b = int((g1a != g2a[p]).sum() - (g1a != g2a).sum())
        hits += a * w.w1 + b * w.w2 <= 1e-12
    lo, hi = wilson(hits, trials)
    return EventEstimate(hits, trials, lo, hi)


@dataclass(frozen=True)
class EquivFrequencies:
    """Per-tuple event frequencies in sampled intersection graphs.

    Each ``*_se`` is the standard error of the per-trial normalised count, which
    accounts for dependence between tuples within one graph.
    """

    trials: int
    pair: float
    triple: float
    two_pairs: float
    pair_se: float
    triple_se: float
    two_pairs_se: float
    x_zero: float


def mc_equiv_frequencies(params: ModelParams, trials: int, seed: int, batch: int = 5000) -> EquivFrequencies:
    n, m = params.n, params.m
    iu, ju = np.triu_indices(n, 1)
    tu = len(iu)
    n_pairs = math.comb(n, 2)
    n_triples = math.comb(n, 3)
    n_two = math.comb(n, 2) * math.comb(n - 2, 2) // 2
    rows = []
    for b, lo in enumerate(range(0, trials, batch)):
        k = min(batch, trials - lo)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, b])))
        u = rng.random((k, tu + n * m))
        # an intersection edge is exactly the (1, 1) state of the joint draw
        user = np.zeros((k, n, n), dtype=bool)
        user[:, iu, ju] = u[:, :tu] < params.p_user.p11
        user |= user.transpose(0, 2, 1)
        attr = (u[:, tu:] < params.q_attr.p11).reshape(k, n, m)
        rows.append(batch_equiv_stats(user, attr))
    s = np.concatenate(rows).astype(float)

    def mean_se(col, denom):
        if denom == 0:
            return float("nan"), float("nan")
        v = s[:, col] / denom
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0

    pm, ps = mean_se(0, n_pairs)
    tm, ts = mean_se(1, n_triples)
    dm, ds = mean_se(2, n_two)
    return EquivFrequencies(trials, pm, tm, dm, ps, ts, ds, float((s[:, 0] == 0).mean()))


# ---------------------------------------------------------------------------
# sweeps


def _axis(v) -> list:
    """Expand a scalar, an explicit list or a ``{"start", "stop", "steps"}`` range."""
    if isinstance(v, Mapping) and "start" in v:
        return list(np.linspace(float(v["start"]), float(v["stop"]), int(v["steps"])))
    if isinstance(v, (list, tuple)):
        return list(v)
    return [v]


def _dist_axis(v) -> list[JointEdgeDistribution]:
    """Distributions from a list of quadruples or from per-entry axes.

    In the per-entry form any of ``p11, p10, p01`` may be a range; ``p00`` is
    the remainder unless given.
    """
    if isinstance(v, Mapping) and not ("start" in v):
        keys = ("11", "10", "01", "00")
        get = lambda k: v.get("p" + k, v.get("q" + k))
        axes = [_axis(get(k)) if get(k) is not None else [None] for k in keys]
        out = []
        for a, b, c, d in itertools.product(*axes):
            if d is None:
                d = 1.0 - a - b - c
                if abs(d) < 1e-15:
                    d = 0.0
            out.append(validate((a, b, c, d)))
        return out
    vals = v if isinstance(v, (list, tuple)) else [v]
    if vals and isinstance(vals[0], (int, float)):
        vals = [vals]
    return [validate(x) for x in vals]


@dataclass(frozen=True)
class SweepSpec:
    n: tuple[int, ...]
    m: tuple[int, ...]
    p_user: tuple[JointEdgeDistribution, ...]
    q_attr: tuple[JointEdgeDistribution, ...]
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        self.cells()  # every cell must validate

    def cells(self) -> list[ModelParams]:
        """Grid cells in row-major order over (n, m, p_user, q_attr)."""
        return [
            ModelParams(int(n), int(m), p, q)
            for n, m, p, q in itertools.product(self.n, self.m, self.p_user, self.q_attr)
        ]

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "SweepSpec":
        return cls(
            n=tuple(int(round(x)) for x in _axis(doc["n"])),
            m=tuple(int(round(x)) for x in _axis(doc.get("m", 0))),
            p_user=tuple(_dist_axis(doc["p"])),
            q_attr=tuple(_dist_axis(doc["q"])),
            trials=int(doc.get("trials", DEFAULT_TRIALS)),
            seed=int(doc["seed"]),
            cap=int(doc.get("cap", DEFAULT_CAP)),
        )


class SweepCellError(AlignLabError):
    exit_code = 4

    def __init__(self, failures: Sequence[tuple[int, ModelParams, BaseException]]):
        self.failures = list(failures)
        msg = "; ".join(f"cell {i} (n={p.n}, m={p.m}): {e}" for i, p, e in self.failures)
        super().__init__(f"{len(self.failures)} sweep cell(s) failed: {msg}")


def _run_cell(args):
    idx, params, trials, seed, cap = args
    try:
        return idx, mc_alignment_success(params, trials, seed, cap, cell=idx), None
    except Exception as exc:  # reported with the cell index by the caller
        return idx, None, exc


def phase_sweep(
    spec: SweepSpec, threads: int = 1, collect_errors: bool = False
) -> list[CellResult] | tuple[list[CellResult], list]:
    """Run every grid cell; rows come back in grid order whatever the worker count.

    Failing cells raise :class:`SweepCellError` naming each cell, or with
    ``collect_errors`` are returned as ``(index, params, exception)`` triples.
    """
    cells = spec.cells()
    jobs = [(i, c, spec.trials, spec.seed, spec.cap) for i, c in enumerate(cells)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(_run_cell, jobs))
    else:
        out = [_run_cell(j) for j in jobs]
    out.sort(key=lambda r: r[0])
    results = [r for _, r, e in out if e is None]
    failures = [(i, cells[i], e) for i, _, e in out if e is not None]
    if collect_errors:
        return results, failures
    if failures:
        raise SweepCellError(failures)
    return results


def write_csv(results: Iterable[CellResult], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        w.writerow(r.csv_row())


def csv_text(results: Iterable[CellResult]) -> str:
    buf = io.StringIO()
    write_csv(results, buf)
    return buf.getvalue()


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("ALIGN_LAB_THREADS", "1")))
    except ValueError:
        return 1
