"""``terabeam`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .channel import UserPath
from .runner import (
    ConfigError,
    ResampleBudgetError,
    config_to_dict,
    load_config,
    run_beampattern,
    run_ee_sweep,
    run_pathloss,
    run_sumrate_sweep,
    write_csv,
    write_table,
)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="terabeam", description="Wideband THz precoding simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", required=True, help="JSON config file")
        if needs_out:
            p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads for trials")
        p.add_argument("-v", "--verbose", action="store_true")

    common(sub.add_parser("sumrate-sweep", help="sum-rate against SNR"))
    common(sub.add_parser("ee-sweep", help="energy efficiency against number of users"))
    bp = sub.add_parser("beampattern", help="per-subcarrier beam pattern of one user")
    common(bp)
    bp.add_argument("--scheme", default="hybrid-full-ps")
    bp.add_argument("--sin-angle", type=float, default=0.5)
    bp.add_argument("--distance", type=float, default=10.0)
    bp.add_argument("--grid-points", type=int, default=8192)
    pl = sub.add_parser("pathloss", help="path loss and available windows over the absorption table")
    common(pl)
    pl.add_argument("--distances", type=_floats, default=[10.0, 100.0], help="comma-separated metres")
    pl.add_argument("--table", default=None, help="absorption table JSON (overrides the config)")
    pl.add_argument("--step-hz", type=float, default=1e9)
    common(sub.add_parser("validate", help="check a config file and exit"), needs_out=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    kind = "sumrate-sweep" if args.command == "validate" else args.command
    try:
        config, spec = load_config(args.config, kind=kind, output_path=getattr(args, "out", None))
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    except (ConfigError, ValueError) as exc:
        print(f"terabeam: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        print(json.dumps(config_to_dict(config, spec), indent=2))
        return 0
    try:
        if args.command == "sumrate-sweep":
            write_csv(run_sumrate_sweep(config, spec, threads=args.threads), args.out)
        elif args.command == "ee-sweep":
            write_csv(run_ee_sweep(config, spec, threads=args.threads), args.out)
        elif args.command == "beampattern":
            user = UserPath(1.0 + 0j, args.sin_angle, args.distance)
            rows = run_beampattern(config, args.scheme, user, args.grid_points)
            write_table(args.out, ("kind", "freq_hz", "sin_angle", "magnitude"), rows,
                        {"scheme": args.scheme, "sin_angle": args.sin_angle})
        elif args.command == "pathloss":
            table = args.table or config.absorption_table_path
            rows = run_pathloss(config, table, args.distances, args.step_hz)
            write_table(args.out, ("freq_hz", "distance_m", "pathloss_db", "in_window"), rows,
                        {"threshold_db": config.window_threshold_db, "table": table or "default"})
    except (ConfigError, ResampleBudgetError, ValueError, OSError) as exc:
        print(f"terabeam: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130
    print(f"wrote {Path(args.out)}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
