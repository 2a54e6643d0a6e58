"""Preprocessing schemas"""

from typing import Dict, List
from pydantic import BaseModel, ConfigDict, Field, model_validator


class CleanPolicy(BaseModel):
    """How missing cells are handled during cleaning"""

    missing: str = Field("impute_mean", pattern="^(drop_row|impute_mean|impute_constant)$")
    fill_value: float = 0.0  # used by impute_constant
    exclude: List[str] = []  # passed through untouched by imputation and scaling

    model_config = ConfigDict(extra="forbid")


class CleanReport(BaseModel):
    """What cleaning changed"""

    input_rows: int = Field(..., ge=0)
    output_rows: int = Field(..., ge=0)
    duplicates_removed: int = Field(0, ge=0)
    rows_dropped: int = Field(0, ge=0)
    missing_imputed: Dict[str, int] = {}

    @model_validator(mode="after")
    def check_row_balance(self):
        if self.rows_dropped + self.output_rows + self.duplicates_removed != self.input_rows:
            raise ValueError("rows_dropped + output_rows + duplicates_removed must equal input_rows")
        if any(count < 0 for count in self.missing_imputed.values()):
            raise ValueError("missing_imputed counts must be non-negative")
        return self


class ScalerState(BaseModel):
    """Per-column mean and population standard deviation"""

    columns: List[str]
    mean: List[float]
    spread: List[float]
    degenerate: List[bool]

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_lengths(self):
        n = len(self.columns)
        if not len(self.mean) == len(self.spread) == len(self.degenerate) == n:
            raise ValueError("mean, spread and degenerate must match columns")
        if any(s < 0 for s in self.spread):
            raise ValueError("spread must be non-negative")
        return self

    @property
    def degenerate_columns(self) -> List[str]:
        return [c for c, flag in zip(self.columns, self.degenerate) if flag]
