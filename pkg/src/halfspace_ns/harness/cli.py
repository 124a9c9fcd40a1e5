"""Command-line interface: ``halfspace-ns <subcommand> [--config FILE] [--set key=value ...]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import ConfigError
from .commands import (COMMANDS, EXIT_CONFIG, cmd_report, cmd_sweep, output_root, parse_axis,
                       run_command)
from .config import apply_overrides, load_config

SUBCOMMANDS = ("analyze", "stationary", "classify", "evolve", "rate-study", "sweep", "report")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="halfspace-ns",
                                 description="Stationary boundary layers and stability runs for the "
                                             "half-space outflow problem")
    ap.add_argument("command", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="JSON or YAML run configuration")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config entry by dotted path (repeatable)")
    ap.add_argument("--out", help="output root (default $HALFSPACE_NS_OUT or ./runs)")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for sweep")
    ap.add_argument("--seed", type=int, help="seed recorded with the run")
    ap.add_argument("--axis", action="append", default=[], metavar="KEY=V1,V2",
                    help="sweep axis (repeatable)")
    ap.add_argument("--sweep-command", choices=sorted(COMMANDS), help="subcommand run at each sweep point")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = output_root(args.out)
    if args.command == "report":
        res = cmd_report(out)
        print(res.message)
        return res.exit_code
    try:
        cfg = apply_overrides(load_config(args.config), args.overrides)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.command == "sweep":
            axes = [parse_axis(a) for a in args.axis]
            res = cmd_sweep(cfg, axes, out, jobs=max(1, args.jobs), command=args.sweep_command)
        else:
            res = run_command(args.command, cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if res.exit_code == EXIT_CONFIG:
        print(f"config error: {res.message}", file=sys.stderr)
    elif res.exit_code != 0:
        print(f"{args.command}: exit {res.exit_code}: {res.message}", file=sys.stderr)
        diag = res.manifest.get("outputs", {}).get("diagnostic")
        if diag:
            print(json.dumps(diag, indent=2, sort_keys=True), file=sys.stderr)
    if res.run_dir is not None:
        print(Path(res.run_dir))
    return res.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
