"""Command line entry point: `oco-control run <config.json> [options]`.

Exit codes: 0 on success, 2 on configuration errors, 3 on numeric failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from numpy.linalg import LinAlgError

from .errors import ConfigError, NumericError
from .harness import ExperimentConfig, run_experiment


def _apply_override(raw: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"override must look like key=value, got {assignment!r}")
    path, value = assignment.split("=", 1)
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    keys = path.split(".")
    node = raw
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override through non-object key {key!r}")
    node[keys[-1]] = parsed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oco-control")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute one seeded experiment from a JSON config")
    run_p.add_argument("config", help="path to the experiment config (a single JSON document)")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--out", default=None, help="output directory for trace.csv / summary.json")
    run_p.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted-path config override, value parsed as JSON when possible",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        for assignment in args.override:
            _apply_override(raw, assignment)
        if args.seed is not None:
            raw["seed"] = args.seed
        cfg = ExperimentConfig.from_dict(raw)
        trace_path, summary_path = run_experiment(cfg, out_dir=args.out)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, FloatingPointError, LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    print(trace_path)
    print(summary_path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
