"""Synthetic dataset schemas"""

from pydantic import BaseModel, ConfigDict, Field


class GenConfig(BaseModel):
    """Synthetic sequence generator settings"""

    n_samples: int = Field(1000, ge=4)
    seq_len: int = Field(10, ge=1)
    n_features: int = Field(6, ge=1)
    class_balance: float = Field(0.5, gt=0.0, lt=1.0)  # share of positive samples
    separability: float = Field(2.0, ge=0.0)  # class mean gap in noise spreads
    ar_coefficient: float = Field(0.5, ge=0.0, lt=1.0)
    noise_spread: float = Field(1.0, gt=0.0)
    seed: int = 0

    model_config = ConfigDict(extra="forbid")
