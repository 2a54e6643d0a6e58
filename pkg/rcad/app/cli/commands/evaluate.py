"""evaluate command"""

import argparse
from pathlib import Path
from typing import List, Tuple

from app.cli.dependencies import add_run_arguments, resolve_config, start_run
from app.data.sequences import SequenceDataset
from app.pipeline.datagen import import_csv
from app.pipeline.evaluate import evaluate_model, write_roc_csv
from app.pipeline.plots import plot_confusion, plot_roc
from app.pipeline.reporting import render_report
from app.schemas.evaluation import EvalReport
from app.store.checkpoints import Checkpoint, load_checkpoint
from app.store.runs import write_manifest

REPORT_JSON = "report.json"
REPORT_TABLE = "report.txt"


def register(subparsers) -> None:
    parser = subparsers.add_parser("evaluate", help="evaluate checkpoints on a dataset")
    parser.add_argument("dataset", type=Path, help="long-format sequence CSV")
    parser.add_argument("--checkpoint", type=Path, required=True)
    parser.add_argument("--compare", type=Path, nargs="+", default=[], help="further checkpoints")
    add_run_arguments(parser)
    parser.add_argument("--plot", action="store_true", help="also write ROC and confusion SVGs")
    parser.set_defaults(run=run)


def _model_names(checkpoints: List[Checkpoint]) -> List[str]:
    names, seen = [], {}
    for checkpoint in checkpoints:
        base = checkpoint.spec.variant
        seen[base] = seen.get(base, 0) + 1
        names.append(base if seen[base] == 1 else f"{base}-{seen[base]}")
    return names


def _inputs_for(checkpoint: Checkpoint, data: SequenceDataset) -> SequenceDataset:
    if checkpoint.feature_names and list(data.feature_names) != checkpoint.feature_names:
        return data.select_features(checkpoint.feature_names)
    return data


def run(args: argparse.Namespace) -> int:
    """Evaluate one checkpoint, or several side by side"""
    config = resolve_config(args)
    paths = [args.checkpoint] + list(args.compare)
    checkpoints = [load_checkpoint(path) for path in paths]
    data = import_csv(args.dataset)

    named: List[Tuple[str, Checkpoint]] = list(zip(_model_names(checkpoints), checkpoints))
    reports: List[Tuple[str, EvalReport]] = []
    for name, checkpoint in named:
        report = evaluate_model(checkpoint.spec, checkpoint.params, _inputs_for(checkpoint, data))
        reports.append((name, report))

    inputs = {"dataset": args.dataset}
    inputs.update({f"checkpoint{i}": path for i, path in enumerate(paths)})
    job = start_run(args, "evaluate", config, inputs)
    finished = []
    for name, report in reports:
        if report.roc_points:
            curves = f"roc-{name}.csv"
            write_roc_csv(report.roc_points, job.path(curves))
            report = report.model_copy(update={"curves_file": curves})
            if args.plot:
                plot_roc(report.roc_points, report.auc, job.path(f"roc-{name}.svg"), title=f"ROC of {name}")
        if args.plot:
            plot_confusion(report.confusion, job.path(f"confusion-{name}.svg"), title=f"Confusion matrix of {name}")
        finished.append((name, report))

    table = render_report(finished, "table")
    job.path(REPORT_JSON).write_text(render_report(finished, "json"), encoding="utf-8")
    job.path(REPORT_TABLE).write_text(table, encoding="utf-8")
    write_manifest(job)
    print(table, end="")
    return 0
