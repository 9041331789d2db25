"""Command-line entry point.

Exit codes: 0 when every check of the run passes, 1 when any check fails,
2 on a configuration error. Relative output directories are placed under
``$ACTIVESCALAR_OUTPUT_ROOT`` (default: the current directory).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError
from .experiments.config import SCENARIOS

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2
SUBCOMMAND_SCENARIOS = {
    "simulate": SCENARIOS,
    "verify": ("verify",),
    "sweep": ("epsilon-sweep",),
}


def _print_result(result) -> None:
    print(f"scenario: {result.config.scenario}")
    print(f"output:   {result.output_dir}")
    for name, ok in result.checks.items():
        print(f"  [{'PASS' if ok else 'FAIL'}] {name}")
    for err in result.errors:
        print(f"  error: {err}")
    print("passed" if result.passed else "FAILED")


def _run_config(args, command: str) -> int:
    from .experiments.config import load_config
    from .experiments.scenarios import run_scenario

    cfg = load_config(args.config)
    allowed = SUBCOMMAND_SCENARIOS[command]
    if cfg.scenario not in allowed:
        raise ConfigError(f"'{command}' runs scenarios {', '.join(allowed)}, not {cfg.scenario}")
    if args.output_dir:
        cfg = cfg.with_output_dir(args.output_dir)
    result = run_scenario(cfg, plots_enabled=not args.no_plots, workers=getattr(args, "workers", 1))
    _print_result(result)
    return EXIT_OK if result.passed else EXIT_FAILED


def _kernel_table(args) -> int:
    import numpy as np

    from .experiments.scenarios import kernel_table_rows, write_kernel_csv

    if not 0 < args.sigma <= 1:
        raise ConfigError("--sigma must lie in (0, 1]")
    rows, table, minorant = kernel_table_rows(args.sigma)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_kernel_csv(rows, out)
    near = rows[:, 0] < 2 * args.sigma
    ok = bool(np.all(rows[near, 1] > 0))
    print(f"wrote {out}: {rows.shape[0]} radii, C = {table.c_bound:.6g}, "
          f"C0 = {minorant.c0:.6g}, a = {minorant.a:.6g}")
    return EXIT_OK if ok else EXIT_FAILED


def _calibrate(args) -> int:
    from . import calibration

    calibration.main()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="activescalar", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_text in (("simulate", "run a simulation scenario"),
                            ("verify", "run inequality verification suites"),
                            ("sweep", "run an (alpha, epsilon) sweep")):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", required=True, help="run configuration (JSON)")
        s.add_argument("--output-dir", help="override the configured output directory")
        s.add_argument("--no-plots", action="store_true", help="skip SVG output")
        if name == "sweep":
            s.add_argument("--workers", type=int, default=1, help="parallel sweep cells")
    k = sub.add_parser("kernel-table", help="tabulate the logarithmic kernel as CSV")
    k.add_argument("--sigma", type=float, default=0.1)
    k.add_argument("--out", required=True)
    sub.add_parser("calibrate", help="refit and rewrite the frozen constants")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "kernel-table":
            return _kernel_table(args)
        if args.command == "calibrate":
            return _calibrate(args)
        return _run_config(args, args.command)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
