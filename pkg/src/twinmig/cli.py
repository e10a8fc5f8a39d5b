"""Command-line client: each subcommand builds a config and hands it to the
experiment runner; ``serve`` starts the HTTP service.

    twinmig train    --config cfg.yaml --seed 0 --seed 1 --out runs/
    twinmig eval     --config cfg.yaml --checkpoint runs/.../checkpoint_seed0.pt
    twinmig baseline --config cfg.yaml
    twinmig route    --config cfg.yaml --strict-paper
    twinmig sweep    --config cfg.yaml
    twinmig serve    --host 127.0.0.1 --port 8000

Exit status is 0 on success and nonzero with a diagnostic on any error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from twinmig.experiments.config import ConfigError, ExperimentConfig, load_config
from twinmig.experiments.runner import run as run_experiment

RUN_COMMANDS = ("train", "eval", "baseline", "route", "sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twinmig", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in RUN_COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} study")
        p.add_argument("--config", metavar="PATH", help="experiment config file (YAML)")
        p.add_argument("--seed", metavar="N", type=int, action="append", default=None,
                       help="seed; repeat the flag for multiple seeds")
        p.add_argument("--out", metavar="DIR", default=None, help="output directory")
        p.add_argument("--checkpoint", metavar="PATH", default=None,
                       help="policy checkpoint (eval/sweep)")
        p.add_argument("--run-id", metavar="ID", default=None,
                       help="override the derived run id")
        p.add_argument("--strict-paper", action="store_true",
                       help="use the verbatim remaining-energy form of the routing heuristic")

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides: dict = {"mode": args.command}
    if args.seed:
        overrides["seeds"] = list(args.seed)
    if args.out:
        overrides["out_dir"] = args.out
    if args.run_id:
        overrides["run_id"] = args.run_id
    if args.strict_paper:
        overrides["strict_paper"] = True
    cfg = dataclasses.replace(cfg, **overrides)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from twinmig.api.app import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    try:
        cfg = _build_config(args)
        summary = run_experiment(cfg, checkpoint=args.checkpoint)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is still a diagnostic, not a traceback dump
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    print(f"run_id: {summary.run_id}")
    print(f"out: {cfg.out_dir}/{summary.run_id}")
    print(json.dumps(summary.aggregates, sort_keys=True, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
