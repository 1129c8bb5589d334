"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 non-identifiable, 3 evaluation error.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

from .errors import CsiidError, EvaluationError, ParseError, PreconditionError
from .estimand import is_identified, parse_sexpr, render

EXIT_OK, EXIT_INPUT, EXIT_NONID, EXIT_EVAL = 0, 1, 2, 3


def _names(arg: str) -> list[str]:
    return [s.strip() for s in arg.split(",") if s.strip()]


def _assignment(arg: str | None) -> dict[str, int]:
    out = {}
    for part in _names(arg or ""):
        if "=" not in part:
            raise ParseError(f"expected NAME=VALUE, got {part!r}")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = int(v)
        except ValueError:
            raise ParseError(f"non-integer value in {part!r}") from None
    return out


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _threads(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("CSIID_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParseError(f"CSIID_THREADS must be an integer, got {env!r}") from None
    return 1


def cmd_identify(args) -> int:
    from .csi import identify_csi
    from .graph import parse_graph
    from .labels import ControlSpec, LabelSet, parse_labels

    g = parse_graph(_read(args.graph))
    if args.labels:
        c_spec, labels = parse_labels(_read(args.labels), g)
    else:
        c_spec = ControlSpec(())
        labels = LabelSet.empty(g, c_spec)
    for v in _names(args.treatment) + _names(args.outcome):
        if v not in g:
            raise ParseError(f"unknown variable {v}")
    result = identify_csi(g, labels, c_spec, _names(args.treatment), _names(args.outcome), threads=_threads(args.threads))
    if not is_identified(result):
        print(f"NON-IDENTIFIABLE: {result.witness}")
        return EXIT_NONID
    print(render(result, args.format))
    return EXIT_OK


def cmd_learn(args) -> int:
    from .csi import learn_labels
    from .distributions import load_distribution
    from .graph import parse_graph
    from .labels import ControlSpec, format_labels

    g = parse_graph(_read(args.graph))
    j = load_distribution(_read(args.dist))
    controls = _names(args.controls) if args.controls is not None else list(g.observed_roots())
    c_spec = ControlSpec(tuple(controls))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        labels = learn_labels(g, j, c_spec, allow_degenerate=args.allow_degenerate)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    text = format_labels(g, labels)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval(args) -> int:
    from .distributions import evaluate, load_distribution

    e = parse_sexpr(_read(args.estimand))
    if not is_identified(e):
        print(f"NON-IDENTIFIABLE: {e.witness}")
        return EXIT_NONID
    j = load_distribution(_read(args.dist))
    value = evaluate(e, j, _assignment(args.treatment_values), _assignment(args.outcome_values))
    print(value)
    print(f"{float(value):.12g}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import BenchConfig, run_benchmark

    cfg = BenchConfig(
        n_values=tuple(range(args.n_min, args.n_max + 1, args.n_step)),
        repetitions=args.reps,
        seed=args.seed,
        timing=not args.no_timing,
        threads=_threads(args.threads),
    )
    report = run_benchmark(cfg)
    csv_text = report.to_csv()
    if args.out_csv:
        with open(args.out_csv, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    if args.plot_prefix:
        for path in report.plot(args.plot_prefix):
            print(f"wrote {path}", file=sys.stderr)
    print(f"identified without labels but not with labels: {report.monotonicity_violations()}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csiid", description="Causal effect identification with context-specific labels.")
    p.add_argument("--threads", type=int, default=None, help="worker pool size (env CSIID_THREADS)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("identify", help="identify P_t(s) from a graph and optional label file")
    s.add_argument("graph")
    s.add_argument("labels", nargs="?")
    s.add_argument("--treatment", required=True, help="comma-separated names")
    s.add_argument("--outcome", required=True, help="comma-separated names")
    s.add_argument("--format", choices=("text", "sexpr"), default="text")
    s.set_defaults(func=cmd_identify)

    s = sub.add_parser("learn", help="learn a label file from an observational distribution")
    s.add_argument("graph")
    s.add_argument("dist", help="joint-table or model file")
    s.add_argument("--controls", default=None, help="comma-separated controls (default: all observed roots)")
    s.add_argument("--out", default=None)
    s.add_argument("--allow-degenerate", action="store_true", help="accept joints with zero cells")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("eval", help="evaluate an s-expression estimand on a distribution")
    s.add_argument("estimand")
    s.add_argument("dist", help="joint-table or model file")
    s.add_argument("--treatment-values", default="")
    s.add_argument("--outcome-values", default="")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bench", help="random-graph benchmark, CSV output")
    s.add_argument("--n-min", type=int, default=30)
    s.add_argument("--n-max", type=int, default=100)
    s.add_argument("--n-step", type=int, default=10)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-csv", default=None)
    s.add_argument("--plot-prefix", default=None, help="write <prefix>_runtime.png and <prefix>_identifiable.png")
    s.add_argument("--no-timing", action="store_true", help="omit wall-clock columns (byte-reproducible output)")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "n_step", 1) < 1:
        print("error: --n-step must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except EvaluationError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL
    except (CsiidError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
