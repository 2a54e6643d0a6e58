"""Report rendering: parameter/value tables, versioned JSON and CSV"""

from typing import List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import ValidationError

from app.core.exceptions import InputError, SchemaError
from app.schemas.evaluation import (
    REPORT_SCHEMA_VERSION,
    EvalReport,
    MetricValues,
    ReportDocument,
    ReportEntry,
)

FORMATS = ("table", "json", "csv")
UNDEFINED = "—"
ROWS = [
    ("Accuracy", "accuracy"),
    ("Precision", "precision"),
    ("Recall", "recall"),
    ("F1-score", "f1"),
    ("AUC", "auc"),
]

NamedReport = Tuple[str, EvalReport]


def percent(value: Optional[float]) -> str:
    return UNDEFINED if value is None else f"{100.0 * value:.1f}"


def _table(reports: Sequence[NamedReport]) -> str:
    lines: List[str] = []
    for name, report in reports:
        lines.append(f"Evaluation of {name}")
        lines.append("Parameters | Value (%)")
        lines += [f"{label} | {percent(getattr(report, key))}" for label, key in ROWS]
        lines.append("")
    lines.append("Comparison")
    lines.append(" | ".join(["Model"] + [label for label, _ in ROWS]))
    for name, report in reports:
        lines.append(" | ".join([name] + [percent(getattr(report, key)) for _, key in ROWS]))
    return "\n".join(lines) + "\n"


def _entry(name: str, report: EvalReport) -> ReportEntry:
    return ReportEntry(
        model=name,
        confusion=report.confusion,
        metrics=MetricValues(**{key: getattr(report, key) for _, key in ROWS}),
        curves_file=report.curves_file,
        roc_points=report.roc_points,
    )


def _json(reports: Sequence[NamedReport]) -> str:
    document = ReportDocument(
        schema_version=REPORT_SCHEMA_VERSION,
        reports=[_entry(name, report) for name, report in reports],
    )
    return document.model_dump_json(indent=2) + "\n"


def _csv(reports: Sequence[NamedReport]) -> str:
    rows = []
    for name, report in reports:
        cm = report.confusion
        row = {"model": name, "tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn}
        row.update({key: getattr(report, key) for _, key in ROWS})
        rows.append(row)
    columns = ["model", "tp", "tn", "fp", "fn"] + [key for _, key in ROWS]
    return pd.DataFrame(rows, columns=columns).to_csv(index=False, na_rep="", lineterminator="\n")


def render_report(reports: Sequence[NamedReport], fmt: str = "table") -> str:
    """Render named reports in insertion order"""
    if not reports:
        raise InputError("Nothing to report")
    if fmt == "table":
        return _table(reports)
    if fmt == "json":
        return _json(reports)
    if fmt == "csv":
        return _csv(reports)
    raise InputError(f"Unknown report format {fmt!r}; expected one of {FORMATS}")


def parse_report_json(text: str) -> List[NamedReport]:
    """Inverse of the json rendering"""
    try:
        document = ReportDocument.model_validate_json(text)
        return [
            (
                entry.model,
                EvalReport(
                    confusion=entry.confusion,
                    roc_points=entry.roc_points,
                    curves_file=entry.curves_file,
                    **entry.metrics.model_dump(),
                ),
            )
            for entry in document.reports
        ]
    except ValidationError as exc:
        raise SchemaError(f"Malformed report document: {exc}") from exc
