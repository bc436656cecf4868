"""Command line: ``nboxsim analyze|run|sample|verify``.

Exit status is 0 on success, 1 on a domain or validation error (including
bad arguments) and 2 when ``verify`` finds an invariant violation.
"""
from __future__ import annotations

import argparse
import sys
import time

from .. import __version__
from ..errors import NBoxError, ValidationError
from .experiment import FORMATS, MAX_SEED, experiment_from_dict, parse_experiment
from .report import emit_report
from .runner import run_experiment
from .verify import run_invariant_suite

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _measurement_arg(text):
    """``open:<i>``, ``open:<i>!`` (force box N+1), ``all`` or ``indist:<i>``."""
    kind, _, arg = text.partition(":")
    if kind == "all" and not arg:
        return {"all_boxes": {}}
    force = arg.endswith("!")
    arg = arg.rstrip("!")
    if kind in ("open", "indist") and arg.isdigit():
        if kind == "open":
            return {"open_box": {"i": int(arg), "force": True} if force else {"i": int(arg)}}
        if not force:
            return {"indistinguishable": {"i": int(arg)}}
    raise argparse.ArgumentTypeError(f"expected open:<i>, indist:<i> or all, got {text!r}")


def _query_arg(text):
    """``conditional``, ..., ``refinement_report[:i]``, ``guessing_game:<opened>:<guess>``, ``raw_eq9:<i>``."""
    name, *args = text.split(":")
    try:
        nums = [int(a) for a in args]
    except ValueError:
        raise argparse.ArgumentTypeError(f"query arguments must be integers: {text!r}") from None
    if name == "guessing_game" and len(nums) == 2:
        return {name: {"opened": nums[0], "guess": nums[1]}}
    if name in ("raw_eq9", "refinement_report") and len(nums) == 1:
        return {name: {"i": nums[0]}}
    if name in ("conditional", "unconditional", "joint", "residual_state", "refinement_report") and not nums:
        return name
    raise argparse.ArgumentTypeError(f"malformed query {text!r}")


def _format_arg(text):
    if text == "json-like":
        return "json"
    if text not in FORMATS:
        raise argparse.ArgumentTypeError(f"format must be one of text, csv, json (json-like), got {text!r}")
    return text


def _seed_arg(text):
    try:
        seed = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= seed <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return seed


def _positive(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _add_ensemble_args(p):
    p.add_argument("--n", type=int, required=True, help="number of boxes N (state space has N+1 dimensions)")
    p.add_argument("--measurement", type=_measurement_arg, required=True, help="open:<i> | all | indist:<i>")
    p.add_argument("--semantics", choices=("pure", "mixture"), required=True)
    p.add_argument("--query", type=_query_arg, action="append", dest="queries", metavar="QUERY",
                   help="repeatable; default: conditional")
    p.add_argument("--format", type=_format_arg, default=None, help="text | csv | json-like")


def _output_args(p):
    p.add_argument("-o", "--output", help="write the report here instead of stdout")


def build_parser():
    parser = _Parser(prog="nboxsim", description="Pre/post-selected measurement statistics for the N-box paradox.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="exact analysis of one N-box experiment")
    _add_ensemble_args(p)
    _output_args(p)

    p = sub.add_parser("run", help="run an experiment file")
    p.add_argument("experiment", help="path to a JSON experiment file, or - for stdin")
    p.add_argument("--format", type=_format_arg, default=None, help="override the file's format")
    p.add_argument("--workers", type=_positive, default=1)
    _output_args(p)

    p = sub.add_parser("sample", help="Monte Carlo trajectories plus exact values")
    _add_ensemble_args(p)
    p.add_argument("--trials", type=_positive, required=True)
    p.add_argument("--seed", type=_seed_arg, required=True)
    p.add_argument("--workers", type=_positive, default=1, help="threads for sampling; output is unchanged")
    _output_args(p)

    p = sub.add_parser("verify", help="run the paradox invariant suite")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=32)
    p.add_argument("--tolerance", type=float, default=1e-9)
    return parser


def _ensemble_doc(args, montecarlo=None):
    doc = {
        "scenario": {"nbox": {"n": args.n}},
        "measurement": args.measurement,
        "semantics": args.semantics,
        "queries": args.queries or ["conditional"],
        "format": args.format or "text",
    }
    if montecarlo:
        doc["montecarlo"] = montecarlo
    return doc


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _report(spec, args, workers=1):
    report = run_experiment(spec, workers=workers)
    _write(emit_report(report, args.format or spec.format), args.output)
    return EXIT_OK


def _verify(args):
    start = time.perf_counter()
    results = run_invariant_suite(args.n_min, args.n_max, args.tolerance)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(
        f"{len(results) - failed}/{len(results)} checks passed for N in [{args.n_min}, {args.n_max}] "
        f"({time.perf_counter() - start:.2f} s)"
    )
    return EXIT_VIOLATION if failed else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _verify(args)
        if args.command == "analyze":
            return _report(experiment_from_dict(_ensemble_doc(args)), args)
        if args.command == "sample":
            doc = _ensemble_doc(args, {"trials": args.trials, "seed": args.seed})
            return _report(experiment_from_dict(doc), args, workers=args.workers)
        if args.experiment == "-":
            text = sys.stdin.read()
        else:
            with open(args.experiment, encoding="utf-8") as fh:
                text = fh.read()
        return _report(parse_experiment(text), args, workers=args.workers)
    except ValidationError as exc:
        print(f"nboxsim: invalid experiment: {exc}", file=sys.stderr)
    except (NBoxError, ValueError, OSError) as exc:
        print(f"nboxsim: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
