"""report command"""

import argparse
from pathlib import Path

from app.core.exceptions import InputError
from app.pipeline.reporting import FORMATS, parse_report_json, render_report


def register(subparsers) -> None:
    parser = subparsers.add_parser("report", help="re-render report JSON files")
    parser.add_argument("reports", type=Path, nargs="+")
    parser.add_argument("--format", dest="fmt", choices=FORMATS, default="table")
    parser.add_argument("--output", type=Path, help="write here instead of stdout")
    parser.set_defaults(run=run)


def run(args: argparse.Namespace) -> int:
    named = []
    for path in args.reports:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"Cannot read {path}: {exc.strerror}") from exc
        named += parse_report_json(text)
    document = render_report(named, args.fmt)
    if args.output:
        args.output.write_text(document, encoding="utf-8")
    else:
        print(document, end="")
    return 0
