"""features command"""

import argparse
from pathlib import Path

import pandas as pd

from app.cli.dependencies import add_run_arguments, resolve_config, start_run
from app.data.tables import DataTable, read_table_csv
from app.pipeline.datagen import ID_COLUMN, TIME_COLUMN, import_csv
from app.pipeline.features import flag_outliers, pearson_matrix, sample_means, select_features, write_correlation_csv
from app.store.runs import write_manifest

CORRELATION_FILE = "correlation.csv"
SELECTION_FILE = "selection.json"
OUTLIER_FILE = "outliers.json"


def register(subparsers) -> None:
    parser = subparsers.add_parser("features", help="correlation analysis and feature selection")
    parser.add_argument("input", type=Path, help="feature table, or a long-format sequence dataset")
    add_run_arguments(parser)
    parser.add_argument("--target")
    parser.add_argument("--k", type=int)
    parser.add_argument("--redundancy-cap", type=float)
    parser.add_argument("--outlier-threshold", type=float)
    parser.set_defaults(run=run)


def load_feature_table(path: Path, target: str) -> DataTable:
    """Per-sample means for sequence datasets, the table itself otherwise"""
    header = list(pd.read_csv(path, nrows=0).columns)
    if header[:2] == [ID_COLUMN, TIME_COLUMN]:
        return sample_means(import_csv(path), label=target)
    return read_table_csv(path)


def run(args: argparse.Namespace) -> int:
    config = resolve_config(
        args,
        {
            "features.target": args.target,
            "features.k": args.k,
            "features.redundancy_cap": args.redundancy_cap,
            "features.outlier_threshold": args.outlier_threshold,
        },
    )
    wanted = config.features
    table = load_feature_table(args.input, wanted.target)
    corr = pearson_matrix(table)
    selection = select_features(corr, wanted.target, wanted.k, wanted.redundancy_cap)
    outliers = flag_outliers(table, corr, wanted.outlier_threshold, exclude=[wanted.target])

    job = start_run(args, "features", config, {"input": args.input})
    write_correlation_csv(corr, job.path(CORRELATION_FILE))
    job.path(SELECTION_FILE).write_text(selection.model_dump_json(indent=2) + "\n", encoding="utf-8")
    job.path(OUTLIER_FILE).write_text(outliers.model_dump_json(indent=2) + "\n", encoding="utf-8")
    write_manifest(job)
    print(" ".join(selection.selected))
    return 0
