"""Feature analysis schemas"""

from typing import List, Optional
from pydantic import BaseModel, ConfigDict, Field


class FeatureConfig(BaseModel):
    """Correlation-based feature selection settings"""

    target: str = "label"
    k: Optional[int] = Field(None, ge=1)  # None keeps every feature
    redundancy_cap: float = Field(0.95, gt=0.0, le=1.0)
    outlier_threshold: float = Field(3.0, gt=0.0)

    model_config = ConfigDict(extra="forbid")


class FeatureSelection(BaseModel):
    """Ordered selected features"""

    target: str
    k: int
    redundancy_cap: float
    selected: List[str]
    relevance: List[float]  # |r| to the target, aligned with selected
    shortfall: bool = False  # fewer than k survived the redundancy cap


class OutlierReport(BaseModel):
    """Rows far from the line through the most correlated feature pair"""

    pair: Optional[List[str]] = None
    threshold: float
    rows: List[int] = []
    residuals: List[float] = []  # standardized residuals of the flagged rows
    warning: Optional[str] = None
