"""Main module for the rcad command line"""

import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.cli.commands import evaluate, features, generate, gradcheck, preprocess, report, train
from app.config import settings
from app.core.exceptions import RcadError
from app.core.logging import configure_logging

COMMANDS = [generate, preprocess, features, train, evaluate, gradcheck, report]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description="Recurrent classifiers for coronary artery disease on sequence data",
    )
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def describe_validation(exc: ValidationError) -> str:
    """One line per failing config key, e.g. ``train.epochs: ...``"""
    lines = []
    for error in exc.errors():
        key = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"{key}: {error['msg']}")
    return "; ".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code"""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or settings.LOG_LEVEL)
    try:
        return args.run(args)
    except ValidationError as exc:
        print(f"error: invalid configuration: {describe_validation(exc)}", file=sys.stderr)
        return 2
    except RcadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
