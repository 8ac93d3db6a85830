"""Command line entry point: ``storyflux ingest|cluster|fit|report|run``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .config import load_config
from .errors import StoryfluxError
from .pipeline import STAGES, run_all

OVERRIDES = {
    # flag -> config key
    "edge_weight_d": "edge_weight_d",
    "min_confidence": "min_confidence",
    "min_story_total": "min_story_total",
    "bin_hours": "bin_hours",
    "dt_max": "dt_max_hours",
    "seed": "seed",
    "workers": "workers",
    "aggregation": "aggregation",
    "chi2_layout": "chi2_layout",
    "output_dir": "output_dir",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="storyflux",
                                     description="Cluster news URLs into stories and measure cross-community influence.")
    parser.add_argument("--version", action="version", version=f"storyflux {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*STAGES, "run"):
        p = sub.add_parser(name, help="all stages in order" if name == "run" else f"{name} stage")
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--edge-weight-d", type=int)
        p.add_argument("--min-confidence", type=int)
        p.add_argument("--min-story-total", type=int)
        p.add_argument("--bin-hours", type=int)
        p.add_argument("--dt-max", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--aggregation", choices=("pooled", "mean"))
        p.add_argument("--chi2-layout", choices=("pairwise", "joint", "both"))
        p.add_argument("--output-dir")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {key: getattr(args, flag) for flag, key in OVERRIDES.items()}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "run":
            result = run_all(cfg)
        else:
            result = STAGES[args.command](cfg)
    except StoryfluxError as exc:
        record = {"error": exc.code, "message": str(exc), "exit_code": exc.exit_code}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return exc.exit_code
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
