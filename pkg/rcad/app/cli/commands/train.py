"""train command"""

import argparse
from pathlib import Path

from app.cli.dependencies import add_run_arguments, resolve_config, start_run
from app.pipeline.datagen import import_csv
from app.pipeline.features import pearson_matrix, sample_means, select_features
from app.pipeline.plots import plot_history
from app.pipeline.training import split, train, write_history_csv
from app.store.checkpoints import Checkpoint, save_checkpoint
from app.store.runs import write_manifest

CHECKPOINT_FILE = "checkpoint.json"
HISTORY_FILE = "history.csv"
HISTORY_PLOT = "history.svg"
SELECTION_FILE = "selection.json"


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="train a recurrent classifier")
    parser.add_argument("dataset", type=Path, help="long-format sequence CSV")
    add_run_arguments(parser)
    parser.add_argument("--variant", choices=["bilstm", "gru", "hybrid"])
    parser.add_argument("--hidden-sizes", type=int, nargs="+")
    parser.add_argument("--dropout", type=float)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--optimizer", choices=["sgd", "adam"])
    parser.add_argument("--val-fraction", type=float)
    parser.add_argument("--patience", type=int, help="early stopping patience; 0 disables")
    parser.add_argument("--no-normalize", dest="normalize", action="store_false", default=None)
    parser.add_argument("--k", type=int, help="keep the k most relevant features")
    parser.add_argument("--plot", action="store_true", help="also render the curves as SVG")
    parser.set_defaults(run=run)


def run(args: argparse.Namespace) -> int:
    """Train one model and write its checkpoint, history and manifest"""
    config = resolve_config(
        args,
        {
            "model.variant": args.variant,
            "model.hidden_sizes": args.hidden_sizes,
            "model.dropout_rate": args.dropout,
            "train.epochs": args.epochs,
            "train.batch_size": args.batch_size,
            "train.learning_rate": args.lr,
            "train.optimizer": args.optimizer,
            "train.val_fraction": args.val_fraction,
            "train.early_stop_patience": args.patience,
            "train.normalize": args.normalize,
            "features.k": args.k,
        },
    )
    data = import_csv(args.dataset)
    selection = None
    if config.features.k is not None:
        # same split as training, so validation samples never inform the choice
        train_part, _ = split(data, config.train.val_fraction, config.train.seed)
        corr = pearson_matrix(sample_means(train_part, label=config.features.target))
        selection = select_features(
            corr, config.features.target, config.features.k, config.features.redundancy_cap
        )
        data = data.select_features(selection.selected)

    spec = config.model.to_spec(data.n_features, data.num_classes)
    params, history = train(spec, config.train, data)

    job = start_run(args, "train", config, {"dataset": args.dataset})
    if selection is not None:
        job.path(SELECTION_FILE).write_text(selection.model_dump_json(indent=2) + "\n", encoding="utf-8")
    save_checkpoint(Checkpoint(spec, params, list(data.feature_names)), job.path(CHECKPOINT_FILE))
    write_history_csv(history, job.path(HISTORY_FILE))
    if args.plot:
        plot_history(history, job.path(HISTORY_PLOT), title=spec.variant)
    write_manifest(job)

    last = history.records[-1]
    print(
        f"{spec.variant}: {len(history)} epochs, val accuracy {last.val_accuracy:.4f}, "
        f"checkpoint {job.directory / CHECKPOINT_FILE}"
    )
    return 0
