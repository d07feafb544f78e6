"""Command-line entry point.

    slitlab <command> --config <file> [--out <dir>] [--seed <u64>]
                      [--format csv,json,svg]

Exit codes: 0 success, 1 validation error, 2 pipeline error. The
environment variable SLITLAB_OUT overrides --out.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .config import COMMANDS, parse_config
from .errors import ConfigError, PipelineError, SlitlabError
from .runner import run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slitlab",
        description="single-slit matter-wave diffraction workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    help_by_command = {
        "simulate": "wide- or fine-beam wave simulation: profile, features, figure",
        "buildup": "particle-by-particle detection build-up histograms",
        "sweep-xb": "deflection-model predictions swept over the beam offset",
        "onset": "fringe visibility versus screen distance (far to near field)",
        "feasibility": "drop-experiment design report with pass/fail checks",
        "compare": "wave vs deflection-model predictions side by side",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=help_by_command[name])
        p.add_argument("--config", required=True, metavar="FILE",
                       help="TOML configuration file")
        p.add_argument("--out", metavar="DIR", default=None,
                       help="output directory (default from config)")
        p.add_argument("--seed", type=int, default=None, metavar="U64",
                       help="override the sampling seed")
        p.add_argument("--format", default=None, metavar="LIST",
                       help="comma-separated subset of csv,json,svg")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError(f"--seed must be a nonnegative integer, got {args.seed}")
        config = parse_config(text, command=args.command)
        if args.format:
            formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
            bad = [f for f in formats if f not in ("csv", "json", "svg")]
            if bad:
                raise ConfigError(f"unknown format(s): {', '.join(bad)}")
            config = dataclasses.replace(
                config, output=dataclasses.replace(config.output, formats=formats))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out_dir = os.environ.get("SLITLAB_OUT") or args.out
    try:
        manifest = run(config, out_dir=out_dir, seed=args.seed)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SlitlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for f, digest in manifest.outputs:
        print(f"{digest[:12]}  {f}")
    print(f"ok: {len(manifest.outputs)} file(s) in {manifest.wall_time_s:.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
