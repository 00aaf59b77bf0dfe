"""Command-line entry point: ``align-lab {sample,align,bounds,phase,verify}``.

Exit codes: 0 ok, 2 invalid input, 3 size cap exceeded, 4 sweep cell
failure, 5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from .alignment import DEFAULT_CAP, map_align
from .bounds import margin_report
from .errors import AlignLabError
from .experiments import SweepSpec, default_threads, phase_sweep, write_csv
from .model import AttributedGraph, ModelParams, anonymize, sample_pair, validate
from .permutation import Permutation
from .verify import INJECTIONS, SUITES, run_suites

EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_CELL, EXIT_VERIFY = 0, 2, 3, 4, 5


class UsageError(AlignLabError):
    pass


def fmt_floats(obj: Any) -> Any:
    """Round every float to 9 significant digits; non-finite values become strings."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(format(obj, ".9g"))
    if isinstance(obj, dict):
        return {k: fmt_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [fmt_floats(v) for v in obj]
    return obj


def emit(doc: Any, out: Optional[str]) -> None:
    text = json.dumps(fmt_floats(doc), indent=2, sort_keys=False) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def parse_quad(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    if isinstance(text, dict):
        return validate(text).quad
    parts = [s for s in str(text).replace(";", ",").split(",") if s.strip()]
    if len(parts) != 4:
        raise UsageError(f"expected 4 comma-separated probabilities, got {text!r}")
    try:
        return tuple(float(s) for s in parts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_perm(text: str, n: int) -> Permutation:
    """Either an image list ``"0,2,1"`` (0-indexed) or one-based cycles ``"(1)(2,3)"``."""
    text = text.strip()
    if text.startswith("("):
        cycles = [c for c in text.strip("()").split(")(")]
        return Permutation.from_cycles(n, [[int(v) for v in c.split(",") if v] for c in cycles], one_based=True)
    perm = Permutation(int(v) for v in text.split(","))
    if len(perm) != n:
        raise UsageError(f"permutation has length {len(perm)}, expected {n}")
    return perm


def load_config(args, keys: Sequence[str]) -> None:
    """Fill unset flags from ``--config``; explicit flags always win."""
    if not getattr(args, "config", None):
        return
    doc = json.loads(Path(args.config).read_text())
    for k in keys:
        if getattr(args, k, None) is None and k in doc:
            setattr(args, k, doc[k])


def params_from(args) -> ModelParams:
    for k in ("n", "m", "p", "q"):
        if getattr(args, k) is None:
            raise UsageError(f"--{k} is required")
    return ModelParams(int(args.n), int(args.m), validate(parse_quad(args.p)), validate(parse_quad(args.q)))


def _graph_from(path: str, key: str) -> AttributedGraph:
    doc = json.loads(Path(path).read_text())
    if key in doc:
        doc = doc[key]
    return AttributedGraph.from_json(doc)


# ---------------------------------------------------------------------------
# subcommands


def cmd_sample(args) -> int:
    load_config(args, ("n", "m", "p", "q", "seed", "perm"))
    if args.seed is None:
        raise UsageError("--seed is required")
    params = params_from(args)
    pair = sample_pair(params, int(args.seed))
    if args.perm is not None:
        perm = parse_perm(str(args.perm), params.n)
    else:
        perm = Permutation.random(params.n, [int(args.seed), 1])
    g2p = anonymize(pair.g2, perm)
    doc = {
        "params": params.to_dict(),
        "seed": int(args.seed),
        "perm": list(perm),
        "perm_cycles": perm.cycle_notation(),
        "g1": pair.g1.to_json(),
        "g2": pair.g2.to_json(),
        "g2_prime": g2p.to_json(),
    }
    emit(doc, args.out)
    if args.out:
        print(json.dumps({"perm": list(perm), "perm_cycles": perm.cycle_notation()}))
    return EXIT_OK


def cmd_align(args) -> int:
    load_config(args, ("g1", "g2prime", "p", "q", "cap", "truth", "tie_seed"))
    if not args.g1 or not args.g2prime:
        raise UsageError("--g1 and --g2prime are required")
    g1 = _graph_from(args.g1, "g1")
    g2p = _graph_from(args.g2prime, "g2_prime")
    if args.p is None or args.q is None:
        raise UsageError("--p and --q are required")
    params = ModelParams(g1.n, g1.m, validate(parse_quad(args.p)), validate(parse_quad(args.q)))
    truth = parse_perm(str(args.truth), g1.n) if args.truth is not None else None
    cap = int(args.cap) if args.cap is not None else DEFAULT_CAP
    tie_seed = int(args.tie_seed) if args.tie_seed is not None else None
    out = map_align(g1, g2p, params, cap=cap, truth=truth, tie_seed=tie_seed)
    emit(out.to_json(), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    load_config(args, ("n", "m", "p", "q", "eps", "corollary_c"))
    params = params_from(args)
    eps = float(args.eps) if args.eps is not None else 0.0
    c = float(args.corollary_c) if args.corollary_c is not None else 1.0
    emit(margin_report(params, eps, c).to_dict(), args.out)
    return EXIT_OK


def cmd_phase(args) -> int:
    if not args.config:
        raise UsageError("--config is required")
    doc = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.trials is not None:
        doc["trials"] = args.trials
    if "seed" not in doc:
        raise UsageError("a seed is required (config key 'seed' or --seed)")
    spec = SweepSpec.from_dict(doc)
    threads = args.threads if args.threads is not None else default_threads()
    results, failures = phase_sweep(spec, threads=threads, collect_errors=True)
    if args.format == "json":
        emit([r.to_dict() for r in results], args.out)
    elif args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(results, fh)
    else:
        write_csv(results, sys.stdout)
    for idx, params, exc in failures:
        print(f"cell {idx} (n={params.n}, m={params.m}) failed: {exc}", file=sys.stderr)
    return EXIT_CELL if failures else EXIT_OK


def cmd_verify(args) -> int:
    results = run_suites(args.suite, seed=args.seed, inject=args.inject)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.checks} checks, {r.violations} violations")
        for note in r.notes:
            print(f"    {note}")
    if args.out:
        emit([r.to_dict() for r in results], args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="align-lab", description="Attributed graph-pair alignment toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def model_flags(sp):
        sp.add_argument("--config", help="JSON file with default values for these flags")
        sp.add_argument("--n", type=int)
        sp.add_argument("--m", type=int)
        sp.add_argument("--p", help="user-pair distribution p11,p10,p01,p00")
        sp.add_argument("--q", help="attribute-pair distribution q11,q10,q01,q00")
        sp.add_argument("--out", help="output path (default stdout)")

    sp = sub.add_parser("sample", help="draw a graph pair and anonymize the second graph")
    model_flags(sp)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--perm", help="anonymizing permutation: 0-indexed images '0,2,1' or cycles '(1)(2,3)'")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("align", help="exhaustive MAP alignment of two graphs")
    sp.add_argument("--config")
    sp.add_argument("--g1", help="graph JSON (or a sample bundle)")
    sp.add_argument("--g2prime", help="anonymized graph JSON (or a sample bundle)")
    sp.add_argument("--p")
    sp.add_argument("--q")
    sp.add_argument("--cap", type=int)
    sp.add_argument("--truth", help="ground-truth permutation, same syntax as sample --perm")
    sp.add_argument("--tie-seed", dest="tie_seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_align)

    sp = sub.add_parser("bounds", help="margins, region label and union bound")
    model_flags(sp)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--corollary-c", dest="corollary_c", type=float)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("phase", help="Monte Carlo sweep over a parameter grid")
    sp.add_argument("--config", help="sweep JSON")
    sp.add_argument("--out")
    sp.add_argument("--threads", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_phase)

    sp = sub.add_parser("verify", help="run oracle self-checks")
    sp.add_argument("--suite", action="append", choices=SUITES)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--inject", choices=INJECTIONS, help="deliberately break a formula")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except AlignLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
