"""preprocess command"""

import argparse
from pathlib import Path

from app.cli.dependencies import add_run_arguments, resolve_config, start_run
from app.data.tables import read_table_csv, write_table_csv
from app.pipeline.preprocess import clean, standardize
from app.store.runs import write_manifest

CLEANED_FILE = "cleaned.csv"
REPORT_FILE = "clean_report.json"
SCALER_FILE = "scaler.json"


def register(subparsers) -> None:
    parser = subparsers.add_parser("preprocess", help="clean and z-score a CSV table")
    parser.add_argument("input", type=Path)
    add_run_arguments(parser)
    parser.add_argument("--missing", choices=["drop_row", "impute_mean", "impute_constant"])
    parser.add_argument("--fill-value", type=float)
    parser.add_argument("--exclude", nargs="*", help="columns passed through untouched")
    parser.set_defaults(run=run)


def run(args: argparse.Namespace) -> int:
    config = resolve_config(
        args,
        {
            "preprocess.missing": args.missing,
            "preprocess.fill_value": args.fill_value,
            "preprocess.exclude": args.exclude,
        },
    )
    table = read_table_csv(args.input)
    cleaned, report = clean(table, config.preprocess)
    scaled, scaler = standardize(cleaned, config.preprocess.exclude)

    job = start_run(args, "preprocess", config, {"input": args.input})
    write_table_csv(scaled, job.path(CLEANED_FILE))
    job.path(REPORT_FILE).write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    job.path(SCALER_FILE).write_text(scaler.model_dump_json(indent=2) + "\n", encoding="utf-8")
    write_manifest(job)
    print(report.model_dump_json())
    return 0
