"""Command line entry point: ``ccspectral run|list|verify``.

Exit codes: 0 when a run confirms (equality or inequality) or reproduces the
counterexample, 2 when it is inconclusive, 1 on configuration or hypothesis
errors. ``verify`` exits 0 only if every selected criterion passes.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import scipy.fft

from .compcomp import NONLINEARITY_LABELS, VERDICTS
from .config import KINDS, PROFILE_TYPES, ConfigError, load_config, run_experiment
from .hdist import ConstraintViolation
from .sequences import FAMILY_LABELS
from .symbols import SYMBOL_LABELS

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2
BUNDLED = ("counterexample", "divcurl", "oscillation", "parabolic")


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.path)
        report = run_experiment(cfg)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_ERROR
    except ConstraintViolation as exc:
        _err(f"hypothesis: {exc}")
        return EXIT_ERROR
    out = Path(args.output or cfg.output)
    try:
        run_dir = report.write(out)
    except OSError as exc:
        _err(f"output: cannot write to {out} ({exc.strerror})")
        return EXIT_ERROR
    failed = [k for k, v in report.checklist.items() if v == "fail"]
    print(f"{report.label}: {report.verdict}")
    if failed:
        print(f"  checklist failures: {', '.join(failed)}")
    print(f"  report: {run_dir / 'report.json'}")
    return EXIT_INCONCLUSIVE if report.verdict == "inconclusive" else EXIT_OK


def cmd_list(args) -> int:
    sections = [
        ("experiments", KINDS),
        ("bundled configs", BUNDLED),
        ("families", FAMILY_LABELS),
        ("symbols", SYMBOL_LABELS),
        ("profiles", PROFILE_TYPES),
        ("nonlinearities", NONLINEARITY_LABELS),
        ("verdicts", VERDICTS),
    ]
    for title, items in sections:
        print(f"{title}:")
        for item in items:
            print(f"  {item}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import run_suite, select

    numbers = select(args.filter)
    if not numbers:
        _err(f"no acceptance criterion matches {args.filter!r}")
        return EXIT_ERROR
    results = run_suite(numbers)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccspectral",
                                     description="Compensated compactness experiments on periodic grids.")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads for FFTs (default 1)")
    parser.add_argument("--output", default=None, help="report directory (overrides the config)")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one JSON experiment config")
    p.add_argument("path", help="config file, or the name of a bundled config")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("list", help="list experiments, families and symbols")
    p.set_defaults(func=cmd_list)
    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--filter", default=None, help="criterion numbers or name fragments, comma separated")
    p.set_defaults(func=cmd_verify)
    return parser


def _resolve(path: str) -> str:
    if not Path(path).exists() and path in BUNDLED:
        from .acceptance import bundled_config
        return str(bundled_config(path))
    return path


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    if args.command == "run":
        args.path = _resolve(args.path)
    with scipy.fft.set_workers(args.jobs):
        return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
