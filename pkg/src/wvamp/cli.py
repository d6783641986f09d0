"""Batch command-line front end.

``wvamp run <config>`` evaluates a scan described by a key-value config
file and writes a CSV (plus a rendered figure next to it).
``wvamp figure1`` runs the significance-window recipe shipped with the
package.

Exit codes: 0 success, 2 configuration error, 3 runtime domain error
(every scan row undefined).
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .config import parse_config
from .errors import ConfigError
from .plotting import render_scan_figure
from .scan import amplification_scan, emit_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wvamp",
        description=(
            "Uncertainty budget and significance scans for amplified weak "
            "measurement with Gaussian meters."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a scan from a config file")
    run.add_argument("config", help="path to a key-value config file")
    run.add_argument("--out", help="CSV output path (overrides the config)")
    run.add_argument(
        "--check-engine",
        action="store_true",
        help="cross-check every row against the grid oracle",
    )
    run.add_argument(
        "--mc-trials",
        type=int,
        metavar="N",
        help="Monte Carlo coverage trials per row (overrides the config)",
    )
    run.add_argument("--seed", type=int, help="seed override for Monte Carlo columns")
    run.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    fig = sub.add_parser("figure1", help="run the packaged significance-window recipe")
    fig.add_argument("--out", help="CSV output path (default figure1.csv)")
    fig.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    return parser


def _usable(row) -> bool:
    """A row counts as defined if it failed nowhere or kept some budget."""
    if not row.reason:
        return True
    return row.total_q is not None or row.total_p is not None


def _execute(cfg, out_path: Path, no_plot: bool) -> int:
    rows = amplification_scan(cfg)
    emit_csv(rows, out_path)
    defined = [row for row in rows if _usable(row)]
    if not no_plot:
        figure_path = out_path.with_suffix(".png")
        if render_scan_figure(rows, figure_path):
            print(f"wrote {out_path} and {figure_path}")
        else:
            print(f"wrote {out_path} (nothing to plot)")
    else:
        print(f"wrote {out_path}")
    if not defined:
        print("every scan row is undefined; see the reason column", file=sys.stderr)
        return 3
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            text = Path(args.config).read_text(encoding="utf-8")
            cfg = parse_config(text)
            if args.check_engine:
                cfg = cfg.with_overrides(check_engine=True)
            if args.mc_trials is not None:
                cfg = cfg.with_overrides(mc_trials=args.mc_trials)
            if args.seed is not None:
                cfg = cfg.with_overrides(seed=args.seed)
            out = Path(args.out) if args.out else Path(cfg.output)
        else:
            text = (
                resources.files("wvamp")
                .joinpath("recipes/figure1.cfg")
                .read_text(encoding="utf-8")
            )
            cfg = parse_config(text)
            out = Path(args.out) if args.out else Path("figure1.csv")
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return _execute(cfg, out, args.no_plot)


if __name__ == "__main__":
    raise SystemExit(main())
