"""Command line entry point: `oco-report render <report-spec.json>`."""

from __future__ import annotations

import argparse
import json
import sys

from .report import ReportError, ReportSpec, render_report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="oco-report")
    sub = parser.add_subparsers(dest="command", required=True)
    render_p = sub.add_parser("render", help="render figures and slope summary from a spec")
    render_p.add_argument("spec", help="path to the report spec (a single JSON document)")
    args = parser.parse_args(argv)
    try:
        with open(args.spec) as fh:
            raw = json.load(fh)
        spec = ReportSpec.from_dict(raw)
        images, txt = render_report(spec)
    except (ReportError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return 2
    for path in images:
        print(path)
    print(txt)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
