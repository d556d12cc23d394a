"""Command-line interface.

Subcommands select the experiment mode::

    gplb rates --config study.ini --out report.csv
    gplb risk --seed 7 --format json
    gplb contraction --config probe.ini --threads 4
    gplb minimax --out battery.csv
    gplb wavelet --config wave.ini
    gplb verify

Flags shared by every subcommand: --config, --seed, --out, --format,
--threads.  Environment variables GPLB_CONFIG, GPLB_SEED, GPLB_OUT,
GPLB_FORMAT, GPLB_THREADS override the file; flags override both.
Without --out the report is written to stdout.  Exit codes: 0 success,
1 verify-battery failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import ConfigError
from .config import MODES, load_config
from .properties import run_verify
from .report import emit_report, render_csv, render_json
from .study import (
    run_contraction_study,
    run_minimax_battery,
    run_rate_study,
    run_risk_study,
    run_wavelet_study,
)

__all__ = ["main", "build_parser"]

_RUNNERS = {
    "risk": run_risk_study,
    "contraction": run_contraction_study,
    "minimax": run_minimax_battery,
    "wavelet": run_wavelet_study,
    "rates": run_rate_study,
}

_MODE_HELP = {
    "risk": "exact and Monte Carlo worst-case risk over the adversarial family",
    "contraction": "posterior mass outside the transfer radii",
    "minimax": "closed-form vs grid-search one-sparse linear minimax risk",
    "wavelet": "wavelet series prior risk at a fine-scale ridge truth",
    "rates": "risk study plus a fitted log-log rate slope",
    "verify": "run the fast property battery and report PASS/FAIL lines",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gplb",
        description="Numerical laboratory for worst-case risk floors of "
        "Gaussian-process posterior means.",
    )
    subparsers = parser.add_subparsers(dest="mode", required=True, metavar="mode")
    for mode in MODES:
        sub = subparsers.add_parser(mode, help=_MODE_HELP[mode])
        sub.add_argument("--config", help="path to an INI experiment config")
        sub.add_argument("--seed", type=int, help="master seed (overrides config)")
        sub.add_argument("--out", help="report path (default: stdout)")
        sub.add_argument("--format", choices=("csv", "json"), help="report format")
        sub.add_argument("--threads", type=int, help="worker threads for grid points")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "mode": args.mode,
        "seed": args.seed,
        "out": args.out,
        "format": args.format,
        "threads": args.threads,
    }
    try:
        config = load_config(args.config, overrides)
        if config.mode == "verify":
            passed, lines = run_verify(config)
            for line in lines:
                print(line)
            return 0 if passed else 1
        report = _RUNNERS[config.mode](config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if config.out is not None:
        emit_report(report, config.out, config.format)
    else:
        text = render_csv(report) if config.format == "csv" else render_json(report)
        sys.stdout.write(text)
    return 0
