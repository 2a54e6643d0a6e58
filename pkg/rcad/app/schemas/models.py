"""Model architecture schemas"""

from typing import Dict, List, Literal, Optional
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.preprocessing import ScalerState

CHECKPOINT_FORMAT = "rcad-checkpoint"
CHECKPOINT_VERSION = 1

DEFAULT_HIDDEN = {"bilstm": [16], "gru": [16], "hybrid": [16, 16]}
LAYER_COUNT = {"bilstm": 1, "gru": 1, "hybrid": 2}


class ModelConfig(BaseModel):
    """Architecture choices that do not depend on the data"""

    variant: str = Field("hybrid", pattern="^(bilstm|gru|hybrid)$")
    hidden_sizes: Optional[List[int]] = None
    dropout_rate: float = Field(0.2, ge=0.0, lt=1.0)

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def fill_hidden_sizes(self):
        if self.hidden_sizes is None:
            self.hidden_sizes = list(DEFAULT_HIDDEN[self.variant])
        if len(self.hidden_sizes) != LAYER_COUNT[self.variant]:
            raise ValueError(
                f"{self.variant} takes {LAYER_COUNT[self.variant]} hidden size(s), "
                f"got {self.hidden_sizes}"
            )
        if any(size < 1 for size in self.hidden_sizes):
            raise ValueError("hidden sizes must be at least 1")
        return self

    def to_spec(self, input_size: int, num_classes: int = 2) -> "ModelSpec":
        return ModelSpec(
            variant=self.variant,
            hidden_sizes=list(self.hidden_sizes or []),
            dropout_rate=self.dropout_rate,
            input_size=input_size,
            num_classes=num_classes,
        )


class ModelSpec(ModelConfig):
    """Full architecture description"""

    input_size: int = Field(..., ge=1)
    num_classes: int = Field(2, ge=2)


class TensorEntry(BaseModel):
    """One parameter tensor, flattened in row-major order"""

    shape: List[int]
    values: List[float]

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_size(self):
        size = 1
        for extent in self.shape:
            if extent < 1:
                raise ValueError(f"tensor extents must be positive, got {self.shape}")
            size *= extent
        if size != len(self.values):
            raise ValueError(f"shape {self.shape} needs {size} values, got {len(self.values)}")
        return self


class CheckpointDocument(BaseModel):
    """On-disk layout of a trained model"""

    format: Literal["rcad-checkpoint"]
    version: Literal[1]
    spec: ModelSpec
    features: List[str] = []
    scaler: Optional[ScalerState] = None
    tensors: Dict[str, TensorEntry]

    model_config = ConfigDict(extra="forbid")
