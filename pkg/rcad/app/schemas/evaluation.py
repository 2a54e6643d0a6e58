"""Evaluation schemas"""

from typing import List, Literal, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, model_validator

REPORT_SCHEMA_VERSION = 1


class ConfusionMatrix(BaseModel):
    """Binary confusion counts, optionally backed by a k×k count matrix.

    ``matrix[i][j]`` counts samples of true class i predicted as j; the binary
    counts then describe class 1 against the rest.
    """

    tp: int = Field(0, ge=0)
    tn: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)
    matrix: Optional[List[List[int]]] = None

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_matrix(self):
        if self.matrix is not None:
            k = len(self.matrix)
            if k < 2 or any(len(row) != k for row in self.matrix):
                raise ValueError("matrix must be square with at least 2 classes")
            if any(v < 0 for row in self.matrix for v in row):
                raise ValueError("matrix counts must be non-negative")
            if sum(map(sum, self.matrix)) != self.total:
                raise ValueError("binary counts must add up to the matrix total")
        return self

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def num_classes(self) -> int:
        return len(self.matrix) if self.matrix is not None else 2

    def one_vs_rest(self, positive: int) -> "ConfusionMatrix":
        """Binary view with ``positive`` as the positive class"""
        if self.matrix is None:
            if positive == 1:
                return ConfusionMatrix(tp=self.tp, tn=self.tn, fp=self.fp, fn=self.fn)
            return ConfusionMatrix(tp=self.tn, tn=self.tp, fp=self.fn, fn=self.fp)
        k = len(self.matrix)
        tp = self.matrix[positive][positive]
        fn = sum(self.matrix[positive]) - tp
        fp = sum(self.matrix[i][positive] for i in range(k)) - tp
        return ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=self.total - tp - fn - fp)


class MetricSet(BaseModel):
    """Accuracy, precision, recall and F1; None marks an undefined value"""

    accuracy: float = Field(..., ge=0.0, le=1.0)
    precision: Optional[float] = Field(None, ge=0.0, le=1.0)
    recall: Optional[float] = Field(None, ge=0.0, le=1.0)
    f1: Optional[float] = Field(None, ge=0.0, le=1.0)


class EvalReport(BaseModel):
    """Confusion matrix, derived metrics and the ROC curve of one model"""

    confusion: ConfusionMatrix
    accuracy: float = Field(..., ge=0.0, le=1.0)
    precision: Optional[float] = Field(None, ge=0.0, le=1.0)
    recall: Optional[float] = Field(None, ge=0.0, le=1.0)
    f1: Optional[float] = Field(None, ge=0.0, le=1.0)
    roc_points: List[Tuple[float, float]] = []
    auc: Optional[float] = Field(None, ge=0.0, le=1.0)
    curves_file: Optional[str] = None

    @model_validator(mode="after")
    def check_roc(self):
        if self.roc_points:
            if tuple(self.roc_points[0]) != (0.0, 0.0) or tuple(self.roc_points[-1]) != (1.0, 1.0):
                raise ValueError("roc_points must run from (0, 0) to (1, 1)")
        return self


class MetricValues(BaseModel):
    accuracy: float = Field(..., ge=0.0, le=1.0)
    precision: Optional[float] = Field(None, ge=0.0, le=1.0)
    recall: Optional[float] = Field(None, ge=0.0, le=1.0)
    f1: Optional[float] = Field(None, ge=0.0, le=1.0)
    auc: Optional[float] = Field(None, ge=0.0, le=1.0)


class ReportEntry(BaseModel):
    """One named model in a report document"""

    model: str
    confusion: ConfusionMatrix
    metrics: MetricValues
    curves_file: Optional[str] = None
    roc_points: List[Tuple[float, float]] = []


class ReportDocument(BaseModel):
    """Versioned JSON report; ``report --format`` re-renders it"""

    schema_version: Literal[1]
    reports: List[ReportEntry]

    model_config = ConfigDict(extra="forbid")
