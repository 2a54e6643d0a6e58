"""Pearson correlation analysis: feature selection and outlier flagging"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from app.core.exceptions import InputError, SchemaError
from app.core.logging import get_logger
from app.data.sequences import SequenceDataset
from app.data.tables import DataTable
from app.pipeline.preprocess import zero_spread
from app.schemas.features import FeatureSelection, OutlierReport

logger = get_logger(__name__)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric matrix of Pearson coefficients between named features"""

    names: List[str]
    r: np.ndarray
    degenerate: List[bool]

    def index(self, name: str) -> int:
        if name not in self.names:
            raise SchemaError(f"Unknown feature '{name}'")
        return self.names.index(name)

    def value(self, a: str, b: str) -> float:
        return float(self.r[self.index(a), self.index(b)])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.r, columns=self.names)
        frame.insert(0, "feature", self.names)
        return frame


def pearson_matrix(table: DataTable) -> CorrelationMatrix:
    """Pairwise Pearson coefficients with the population convention.

    Zero-spread features are flagged degenerate; their off-diagonal entries
    and their own diagonal entry are 0.
    """
    if table.row_count < 2:
        raise InputError("Correlation needs at least 2 rows")
    values = table.to_numpy()
    if np.isnan(values).any():
        raise InputError("Correlation needs a table without missing cells")

    mean = values.mean(axis=0)
    centered = values - mean
    cov = centered.T @ centered / len(values)
    spread = np.sqrt(np.diag(cov))
    degenerate = zero_spread(spread, mean)

    safe = np.where(degenerate, 1.0, spread)
    r = cov / np.outer(safe, safe)
    r[degenerate, :] = 0.0
    r[:, degenerate] = 0.0
    r = np.clip((r + r.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(r, np.where(degenerate, 0.0, 1.0))

    if degenerate.any():
        logger.warning(
            "Zero-spread features in correlation: %s",
            [n for n, d in zip(table.column_names, degenerate) if d],
        )
    return CorrelationMatrix(table.column_names, r, [bool(d) for d in degenerate])


def select_features(
    corr: CorrelationMatrix, target: str, k: Optional[int] = None, redundancy_cap: float = 0.95
) -> FeatureSelection:
    """Greedy max-relevance selection with a redundancy cap.

    Candidates are visited by descending |r| to the target (ties by name); a
    candidate is skipped when its |r| with any already selected feature
    exceeds the cap.
    """
    t = corr.index(target)
    candidates = [name for name in corr.names if name != target]
    if k is None:
        k = len(candidates)
    if not 1 <= k <= len(candidates):
        raise InputError(f"k must lie in [1, {len(candidates)}], got {k}")

    relevance = {name: abs(float(corr.r[corr.index(name), t])) for name in candidates}
    ranked = sorted(candidates, key=lambda name: (-relevance[name], name))

    selected: List[str] = []
    for name in ranked:
        if len(selected) == k:
            break
        i = corr.index(name)
        if any(abs(corr.r[i, corr.index(s)]) > redundancy_cap for s in selected):
            continue
        selected.append(name)

    shortfall = len(selected) < k
    if shortfall:
        logger.warning(
            "Only %d of %d features survive redundancy cap %.3f", len(selected), k, redundancy_cap
        )
    return FeatureSelection(
        target=target,
        k=k,
        redundancy_cap=redundancy_cap,
        selected=selected,
        relevance=[relevance[name] for name in selected],
        shortfall=shortfall,
    )


def flag_outliers(
    table: DataTable, corr: CorrelationMatrix, threshold: float, exclude: Sequence[str] = ()
) -> OutlierReport:
    """Flag rows far from the least-squares line of the most correlated pair.

    The pair (i, j), i before j in column order, maximizes |r| among
    non-degenerate features; ties go to the earliest pair. Residuals of j
    regressed on i are divided by their population spread.
    """
    if not threshold > 0:
        raise InputError(f"Outlier threshold must be positive, got {threshold}")
    usable = [
        idx
        for idx, name in enumerate(corr.names)
        if not corr.degenerate[idx] and name not in exclude
    ]
    if len(usable) < 2:
        warning = "Fewer than two non-degenerate features; nothing to compare"
        logger.warning(warning)
        return OutlierReport(threshold=threshold, warning=warning)

    best = None
    for a_pos, a in enumerate(usable):
        for b in usable[a_pos + 1:]:
            strength = abs(corr.r[a, b])
            if best is None or strength > best[0]:
                best = (strength, a, b)
    _, i, j = best
    name_i, name_j = corr.names[i], corr.names[j]

    x = table.column(name_i)
    y = table.column(name_j)
    x_centered = x - x.mean()
    slope = float(x_centered @ (y - y.mean()) / (x_centered @ x_centered))
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (intercept + slope * x)
    spread = float(residuals.std())
    if zero_spread(spread, np.abs(y).max()):
        return OutlierReport(pair=[name_i, name_j], threshold=threshold)

    scores = residuals / spread
    rows = [int(row) for row in np.flatnonzero(np.abs(scores) > threshold)]
    if rows:
        logger.info("Flagged %d outlier rows on pair (%s, %s)", len(rows), name_i, name_j)
    return OutlierReport(
        pair=[name_i, name_j],
        threshold=threshold,
        rows=rows,
        residuals=[float(scores[row]) for row in rows],
    )


def sample_means(data: SequenceDataset, label: str = "label") -> DataTable:
    """One row per sample: the time-mean of each feature plus its label"""
    if label in data.feature_names:
        raise SchemaError(f"Feature name '{label}' collides with the label column")
    frame = pd.DataFrame(data.features.mean(axis=1), columns=list(data.feature_names))
    frame[label] = data.labels.astype(np.float64)
    return DataTable(frame)


def write_correlation_csv(corr: CorrelationMatrix, path: Union[str, Path]) -> None:
    corr.to_frame().to_csv(path, index=False, lineterminator="\n")
