"""Training schemas"""

from typing import List, Optional
from pydantic import BaseModel, ConfigDict, Field


class TrainConfig(BaseModel):
    """Mini-batch training settings"""

    epochs: int = Field(30, ge=1)
    batch_size: int = Field(32, ge=1)
    learning_rate: float = Field(1e-3, ge=0.0)
    optimizer: str = Field("adam", pattern="^(sgd|adam)$")
    val_fraction: float = Field(0.2, gt=0.0, lt=1.0)
    seed: int = 0
    early_stop_patience: int = Field(0, ge=0)  # 0 disables early stopping
    normalize: bool = True  # z-score features with a scaler fit on the training split

    model_config = ConfigDict(extra="forbid")


class EpochRecord(BaseModel):
    """Metrics after one epoch"""

    epoch: int = Field(..., ge=1)
    train_loss: float
    val_loss: float
    train_accuracy: float = Field(..., ge=0.0, le=1.0)
    val_accuracy: float = Field(..., ge=0.0, le=1.0)


class TrainingHistory(BaseModel):
    """Per-epoch training curve"""

    records: List[EpochRecord] = []
    best_epoch: Optional[int] = None
    stopped_early: bool = False

    def __len__(self) -> int:
        return len(self.records)
