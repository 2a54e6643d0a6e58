"""Confusion matrices, classification metrics and ROC/AUC"""

from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.metrics import (
    accuracy_score,
    confusion_matrix,
    precision_recall_fscore_support,
    roc_auc_score,
    roc_curve,
)

from app.core.exceptions import InputError, UndefinedMetricError
from app.core.logging import get_logger
from app.data.sequences import SequenceDataset
from app.models.network import ModelParams, predict_proba
from app.pipeline.preprocess import apply_sequence_scaler
from app.schemas.evaluation import ConfusionMatrix, EvalReport, MetricSet
from app.schemas.models import ModelSpec

logger = get_logger(__name__)

AVERAGES = ("binary", "macro", "weighted")
RocPoints = List[Tuple[float, float]]


def _as_labels(values: Sequence[int], what: str) -> np.ndarray:
    array = np.asarray(values)
    if array.ndim != 1:
        raise InputError(f"{what} must be one-dimensional")
    if array.size and (np.any(array < 0) or np.any(array != np.round(array))):
        raise InputError(f"{what} must be non-negative class indices")
    return array.astype(np.int64)


def confusion(
    labels: Sequence[int], predictions: Sequence[int], num_classes: Optional[int] = None
) -> ConfusionMatrix:
    """Count outcomes with class 1 as the positive class.

    With more than two classes a k×k matrix is kept as well and the binary
    counts describe class 1 against the rest.
    """
    y = _as_labels(labels, "labels")
    p = _as_labels(predictions, "predictions")
    if y.shape != p.shape:
        raise InputError(f"labels ({y.size}) and predictions ({p.size}) differ in length")
    observed = int(max(y.max(initial=0), p.max(initial=0))) + 1
    k = max(num_classes or 2, observed, 2)
    if y.size == 0:
        return ConfusionMatrix()

    matrix = confusion_matrix(y, p, labels=np.arange(k))
    if k == 2:
        tn, fp, fn, tp = (int(v) for v in matrix.ravel())
        return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)
    tp = int(matrix[1, 1])
    fn = int(matrix[1].sum()) - tp
    fp = int(matrix[:, 1].sum()) - tp
    tn = int(matrix.sum()) - tp - fn - fp
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn, matrix=matrix.tolist())


def _as_matrix(cm: ConfusionMatrix) -> np.ndarray:
    if cm.matrix is not None:
        return np.asarray(cm.matrix, dtype=np.int64)
    return np.array([[cm.tn, cm.fp], [cm.fn, cm.tp]], dtype=np.int64)


def _expand(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Label and prediction vectors that reproduce ``matrix``"""
    true, predicted = np.indices(matrix.shape)
    counts = matrix.ravel()
    return np.repeat(true.ravel(), counts), np.repeat(predicted.ravel(), counts)


def _defined(value: float) -> Optional[float]:
    return None if np.isnan(value) else float(value)


def _mean(values: Sequence[Optional[float]], weights: Sequence[float]) -> Optional[float]:
    pairs = [(v, w) for v, w in zip(values, weights) if v is not None]
    total = sum(w for _, w in pairs)
    if not pairs or total == 0:
        return None
    return sum(v * w for v, w in pairs) / total


def metrics(cm: ConfusionMatrix, average: str = "binary") -> MetricSet:
    """Accuracy, precision, recall and F1.

    Zero denominators give None rather than 0, and F1 is None unless both
    precision and recall are defined. ``macro`` and ``weighted`` average the
    one-vs-rest values of every class (weighted by support) and skip classes
    whose value is undefined.
    """
    if average not in AVERAGES:
        raise InputError(f"average must be one of {AVERAGES}, got {average!r}")
    if cm.total == 0:
        raise InputError("Cannot compute metrics of an empty confusion matrix")

    matrix = _as_matrix(cm)
    y_true, y_pred = _expand(matrix)
    accuracy = float(accuracy_score(y_true, y_pred))
    precision, recall, f1, support = precision_recall_fscore_support(
        y_true, y_pred, labels=np.arange(len(matrix)), average=None, zero_division=np.nan
    )
    per_class = []
    for p, r, f in zip(precision, recall, f1):
        p, r = _defined(p), _defined(r)
        per_class.append((p, r, _defined(f) if p is not None and r is not None else None))

    if average == "binary":
        precision, recall, f1 = per_class[1]
        return MetricSet(accuracy=accuracy, precision=precision, recall=recall, f1=f1)
    weights = [1.0] * len(per_class) if average == "macro" else [float(s) for s in support]
    return MetricSet(
        accuracy=accuracy,
        precision=_mean([p for p, _, _ in per_class], weights),
        recall=_mean([r for _, r, _ in per_class], weights),
        f1=_mean([f for _, _, f in per_class], weights),
    )


def roc_auc(labels: Sequence[int], scores: Sequence[float]) -> Tuple[RocPoints, float]:
    """ROC points over descending distinct scores and the trapezoidal AUC.

    Samples sharing a score cross the threshold together, so ties contribute
    half a concordant pair.
    """
    y = _as_labels(labels, "labels")
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != y.shape:
        raise InputError(f"labels ({y.size}) and scores ({s.size}) differ in length")
    if np.any(y > 1):
        raise InputError("ROC needs binary labels")
    if not np.all(np.isfinite(s)) or np.any((s < 0.0) | (s > 1.0)):
        raise InputError("scores must be probabilities in [0, 1]")
    positives = int(y.sum())
    if positives == 0 or positives == y.size:
        raise UndefinedMetricError("AUC is undefined when only one class is present")

    fpr, tpr, _ = roc_curve(y, s, pos_label=1, drop_intermediate=False)
    auc = float(roc_auc_score(y, s))
    return [(float(f), float(t)) for f, t in zip(fpr, tpr)], auc


def build_report(
    labels: Sequence[int],
    probabilities: np.ndarray,
    num_classes: int = 2,
    curves_file: Optional[str] = None,
) -> EvalReport:
    """EvalReport from true labels and per-class probabilities"""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    y = _as_labels(labels, "labels")
    if y.size == 0:
        raise InputError("Cannot evaluate an empty dataset")
    cm = confusion(y, probabilities.argmax(axis=1), num_classes)
    scores = metrics(cm, "binary" if cm.num_classes == 2 else "macro")

    points: RocPoints = []
    auc = None
    if cm.num_classes == 2:
        try:
            points, auc = roc_auc(y, np.clip(probabilities[:, 1], 0.0, 1.0))
        except UndefinedMetricError as exc:
            logger.warning("%s; report carries no ROC curve", exc)
    return EvalReport(
        confusion=cm,
        accuracy=scores.accuracy,
        precision=scores.precision,
        recall=scores.recall,
        f1=scores.f1,
        roc_points=points,
        auc=auc,
        curves_file=curves_file if points else None,
    )


def evaluate_model(
    spec: ModelSpec,
    params: ModelParams,
    data: SequenceDataset,
    curves_file: Optional[str] = None,
) -> EvalReport:
    """Frozen-parameter inference over ``data``, scaled by the stored scaler"""
    if data.n_samples == 0:
        raise InputError("Cannot evaluate an empty dataset")
    if params.scaler is not None:
        data = apply_sequence_scaler(data, params.scaler)
    probabilities = predict_proba(spec, params, data.features)
    report = build_report(data.labels, probabilities, spec.num_classes, curves_file)
    logger.info(
        "Evaluated %s on %d samples: accuracy %.4f", spec.variant, data.n_samples, report.accuracy
    )
    return report


def write_roc_csv(points: RocPoints, path: Union[str, Path]) -> None:
    frame = pd.DataFrame(points, columns=["fpr", "tpr"])
    frame.to_csv(path, index=False, lineterminator="\n")
