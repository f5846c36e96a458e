"""Batch front-end: configure a sweep, run it, emit CSV, summary, figures.

Exit codes: 0 when every requested run completed, 1 for configuration
problems (bad flags, bad config file), 2 for runtime failures.  A partially
written CSV is removed on failure; a complete CSV from an earlier step is
left in place.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config as config_mod
from .config import ConfigError, SimConfig, load_config, with_overrides
from .outage import sweep_snr
from .report import render_figures, summary_table, write_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors, so exit 1 rather than
    # argparse's default 2 (which this tool reserves for runtime failures)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="coopmimo",
        description=(
            "Sweep outage probability versus receive SNR for a two-hop "
            "relay link under statistical-CSI precoding."
        ),
    )
    parser.add_argument("--config", metavar="PATH", help="config file (INI)")
    parser.add_argument(
        "--snr",
        metavar="A:B:STEP",
        help="sweep range in dB (START:STOP:STEP, inclusive) or comma list",
    )
    parser.add_argument(
        "--protocol",
        metavar="NAME[,NAME...]",
        help="protocols to sweep (pdf, df, af, no_relay, pdf_non_orthogonal)",
    )
    parser.add_argument(
        "--mode",
        choices=config_mod.PRECODER_MODES,
        help="precoder/power-allocation mode",
    )
    parser.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    parser.add_argument("--seed", type=int, help="base RNG seed")
    parser.add_argument(
        "--output", metavar="PATH", default="results.csv", help="CSV output path"
    )
    parser.add_argument(
        "--target-outage",
        type=float,
        dest="target_outage",
        help="outage level for the gain summary",
    )
    parser.add_argument("--workers", type=int, help="parallel worker processes")
    parser.add_argument(
        "--no-plot", action="store_true", help="skip figure rendering"
    )
    return parser


def _configure(args: argparse.Namespace) -> SimConfig:
    cfg = load_config(args.config) if args.config else SimConfig()
    overrides = {}
    if args.snr is not None:
        overrides["snr_db"] = config_mod._parse_snr_spec(args.snr)
    if args.protocol is not None:
        overrides["protocols"] = config_mod._parse_protocols(args.protocol)
    for key in ("mode", "trials", "seed", "target_outage", "workers"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    return with_overrides(cfg, **overrides) if overrides else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _configure(args)
    except (ConfigError, OSError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    out_path = Path(args.output)
    csv_started = False
    try:
        rows = sweep_snr(cfg)
        csv_started = True
        write_csv(out_path, rows, cfg.seed)
    except Exception as err:  # noqa: BLE001 - process boundary
        if csv_started:
            out_path.unlink(missing_ok=True)
        print(f"run failed: {err}", file=sys.stderr)
        return EXIT_RUNTIME

    try:
        print(summary_table(rows, cfg.target_outage))
        print(f"wrote {out_path}")
        if not args.no_plot:
            for fig_path in render_figures(rows, out_path, cfg.target_outage):
                print(f"wrote {fig_path}")
    except Exception as err:  # noqa: BLE001 - CSV is complete; keep it
        print(f"reporting failed: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
