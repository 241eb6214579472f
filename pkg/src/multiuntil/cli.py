"""Command line: ``multiuntil {check,simulate,compare}``.

Exit status: 0 on success (threshold verdicts are reported, they do not set
the exit status), 1 for invalid input, 2 for internal errors.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import report
from .checker import Variant, check, explain_product
from .errors import QuerySyntaxError, ValidationError
from .formula import ThresholdQuery, format_query, parse_query
from .modelfile import read_model
from .oracle import estimate
from .transient import DEFAULT_EPSILON

UNSAFE_NOTE = "original: known-incorrect algorithm, shown for comparison only"


def _add_common(p):
    p.add_argument("--model", required=True, help="model file (see README for the format)")
    p.add_argument("--formula", required=True, help='e.g. "a U[1,2] b U[3,4] c"')
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock timing in the report (breaks byte-for-byte "
                        "reproducibility)")


def _add_numeric(p):
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                   help="truncation error per transient matrix (default: %(default)g)")


def _add_sampling(p):
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--confidence", type=float, default=0.99)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="multiuntil",
        description="Probability of time-bounded multiple-until formulas on CTMCs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="numerical model checking with one algorithm")
    _add_common(p)
    _add_numeric(p)
    p.add_argument("--algorithm", choices=[v.value for v in Variant], default="corrected")
    p.add_argument("--explain", action="store_true", help="list the factors of the product")

    p = sub.add_parser("simulate", help="Monte Carlo estimate from the path semantics")
    _add_common(p)
    _add_sampling(p)

    p = sub.add_parser("compare", help="all three algorithms side by side with the estimate")
    _add_common(p)
    _add_numeric(p)
    _add_sampling(p)
    return parser


def _load(args):
    model = read_model(args.model)
    try:
        query = parse_query(args.formula)
    except QuerySyntaxError as exc:
        raise ValidationError(f"--formula: {exc}\n  {args.formula}\n  {' ' * exc.offset}^") from None
    threshold = query if isinstance(query, ThresholdQuery) else None
    path = query.path if threshold else query
    return model, query, threshold, path


def cmd_check(args):
    model, query, threshold, path = _load(args)
    settings = {"algorithm": args.algorithm, "epsilon": args.epsilon}
    rep = report.new_report("check", args.model, args.formula, format_query(query), settings)
    result = check(model.ctmc, path, args.algorithm, args.epsilon)
    rep["results"] = {args.algorithm: report.prob_vector_entry(result, threshold)}
    if args.explain:
        rep["factors"] = [
            {"label": f.label, "kind": f.kind, "time": f.time,
             "shape": list(f.matrix.shape)}
            for f in explain_product(model.ctmc, path, args.algorithm, args.epsilon)]
    return rep


def cmd_simulate(args):
    model, query, threshold, path = _load(args)
    settings = {"samples": args.samples, "seed": args.seed, "confidence": args.confidence}
    rep = report.new_report("simulate", args.model, args.formula, format_query(query), settings)
    est = estimate(model.ctmc, path, args.samples, args.seed, args.confidence)
    rep["oracle"] = report.estimate_entry(est, threshold)
    return rep


def cmd_compare(args):
    model, query, threshold, path = _load(args)
    settings = {"epsilon": args.epsilon, "samples": args.samples, "seed": args.seed,
                "confidence": args.confidence}
    rep = report.new_report("compare", args.model, args.formula, format_query(query), settings)
    rep["results"] = {
        v.value: report.prob_vector_entry(check(model.ctmc, path, v, args.epsilon), threshold)
        for v in Variant}
    est = estimate(model.ctmc, path, args.samples, args.seed, args.confidence)
    rep["oracle"] = report.estimate_entry(est, threshold)
    return rep


COMMANDS = {"check": cmd_check, "simulate": cmd_simulate, "compare": cmd_compare}


def _verdict(entry, key):
    return "" if key not in entry else ("true" if entry[key] else "false")


def render_text(rep):
    lines = [f"query: {rep['canonical_query']}", f"model: {rep['model']}"]
    results = rep.get("results", {})
    if rep["command"] == "check":
        (name, entry), = results.items()
        lines.append(f"algorithm: {name}" + ("  (UNSAFE: known-incorrect)" if entry["unsafe"] else ""))
        has_verdict = "verdicts" in entry
        lines.append("state  probability" + ("            verdict" if has_verdict else ""))
        for s, p in enumerate(entry["probabilities"]):
            row = f"{s:<6} {p:<22.17g}"
            if has_verdict:
                row += " " + ("true" if entry["verdicts"][s] else "false")
            lines.append(row.rstrip())
        lines.append(f"initial distribution: {entry['initial']:.17g}"
                     + (f"  verdict: {_verdict(entry, 'initial_verdict')}" if has_verdict else ""))
        lines.append(f"error bound: {entry['error_bound']:.3g}")
        for f in rep.get("factors", []):
            lines.append(f"  factor {f['label']:<28} {f['kind']:<9} "
                         f"{'x'.join(map(str, f['shape']))}")
    else:
        lines.append(f"{'method':<12} {'P(initial)':<24} verdict")
        for name, entry in results.items():
            tag = name + ("*" if entry["unsafe"] else "")
            lines.append(f"{tag:<12} {entry['initial']:<24.17g} "
                         f"{_verdict(entry, 'initial_verdict')}".rstrip())
        if "oracle" in rep:
            o = rep["oracle"]
            est = f"{o['p_hat']:.6g} +- {o['radius']:.2g}"
            lines.append(f"{'oracle':<12} {est:<24} {_verdict(o, 'verdict')}".rstrip())
            lines.append(f"oracle: {o['successes']}/{o['samples']} paths, "
                         f"{o['confidence']:g} Wilson interval, seed {o['seed']}")
        if "original" in results:
            lines.append("* " + UNSAFE_NOTE)
    if "timing_seconds" in rep:
        lines.append(f"time: {rep['timing_seconds']:.3f} s")
    return "\n".join(lines) + "\n"


def main(argv=None):
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        rep = COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.timing:
        rep["timing_seconds"] = time.perf_counter() - start
    sys.stdout.write(report.dumps(rep) if args.json else render_text(rep))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
