"""generate command"""

import argparse

from app.cli.dependencies import add_run_arguments, resolve_config, start_run
from app.pipeline.datagen import export_csv, generate
from app.store.runs import write_manifest

DATASET_FILE = "dataset.csv"


def register(subparsers) -> None:
    parser = subparsers.add_parser("generate", help="write a synthetic sequence dataset")
    add_run_arguments(parser)
    parser.add_argument("--n-samples", type=int)
    parser.add_argument("--seq-len", type=int)
    parser.add_argument("--n-features", type=int)
    parser.add_argument("--class-balance", type=float)
    parser.add_argument("--separability", type=float)
    parser.set_defaults(run=run)


def run(args: argparse.Namespace) -> int:
    """Generate a dataset and write it as long-format CSV"""
    config = resolve_config(
        args,
        {
            "generate.n_samples": args.n_samples,
            "generate.seq_len": args.seq_len,
            "generate.n_features": args.n_features,
            "generate.class_balance": args.class_balance,
            "generate.separability": args.separability,
        },
    )
    data = generate(config.generate)
    job = start_run(args, "generate", config)
    export_csv(data, job.path(DATASET_FILE))
    write_manifest(job)
    print(job.directory / DATASET_FILE)
    return 0
