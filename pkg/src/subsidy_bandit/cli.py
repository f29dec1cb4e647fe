"""Command-line entry point.

    subsidy-bandit run CONFIG [--out DIR] [--jobs N] [--seed S]
    subsidy-bandit sweep CONFIG [--out DIR] [--jobs N] [--seed S]
    subsidy-bandit reproduce {fig1,fig2,ts-linear,scaling} [--out DIR] [--jobs N] [--seed S]
    subsidy-bandit verify [--out DIR] [--quick]

Exit codes: 0 success, 1 a check failed, 2 bad usage or invalid configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .exceptions import SubsidyBanditError
from .reproduce import TARGETS, reproduce
from .runner import default_jobs, export_csv, load_config, run_replications, sweep
from .verify import run_suite, write_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--out", default=None, help="output directory (default: current directory)")
    p.add_argument("--jobs", type=int, default=default_jobs(),
                   help="worker processes for replications (default: CPU count)")
    if seed:
        p.add_argument("--seed", type=int, default=None, help="override the config base_seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subsidy-bandit",
                                     description="Bandits with cost subsidy: simulations and checks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="replicate every policy on one instance")
    p.add_argument("config")
    _common(p)
    p = sub.add_parser("sweep", help="replicate over the config's parameter grid")
    p.add_argument("config")
    _common(p)
    p = sub.add_parser("reproduce", help="run a built-in experiment and check it")
    p.add_argument("target", choices=sorted(TARGETS))
    _common(p)
    p = sub.add_parser("verify", help="run the numeric verification suite")
    _common(p, seed=False)
    p.add_argument("--quick", action="store_true", help="smaller Monte Carlo samples")
    return parser


def _experiment(args, is_sweep: bool) -> int:
    path = Path(args.config)
    if not path.is_file():
        print(f"error: config file not found: {path}", file=sys.stderr)
        return EXIT_USAGE
    cfg = load_config(path)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=args.seed)
    if cfg.is_sweep and not is_sweep:
        print("error: config defines a sweep; use the 'sweep' subcommand", file=sys.stderr)
        return EXIT_USAGE
    cfg.validate()
    out = Path(args.out) if args.out else Path(".")
    summary = sweep(cfg, args.jobs) if is_sweep else run_replications(cfg, args.jobs)
    if cfg.summary_path:
        print(export_csv(summary, out / cfg.summary_path))
    if cfg.trajectory_path:
        print(export_csv(summary.trajectory, out / cfg.trajectory_path))
    return EXIT_OK


def _reproduce(args) -> int:
    out = Path(args.out) if args.out else Path("results") / args.target
    checks, written = reproduce(args.target, out, args.jobs, args.seed or 0)
    for path in written:
        print(path)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def _verify(args) -> int:
    results = run_suite(quick=args.quick)
    out = Path(args.out) if args.out else Path(".")
    print(write_report(results, out / "verify_report.csv"))
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.check} {r.params}: "
              f"value={r.value:.6g} bound={r.bound:.6g}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("run", "sweep"):
            return _experiment(args, args.command == "sweep")
        if args.command == "reproduce":
            return _reproduce(args)
        return _verify(args)
    except SubsidyBanditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
