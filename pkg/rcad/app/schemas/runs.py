"""Run configuration and manifest schemas"""

from typing import Any, Dict, List, Optional
from datetime import datetime
from pydantic import BaseModel, ConfigDict

from app.schemas.datasets import GenConfig
from app.schemas.features import FeatureConfig
from app.schemas.models import ModelConfig
from app.schemas.preprocessing import CleanPolicy
from app.schemas.training import TrainConfig


class RunConfig(BaseModel):
    """Everything a run needs, validated before any work starts"""

    generate: GenConfig = GenConfig()
    preprocess: CleanPolicy = CleanPolicy()
    features: FeatureConfig = FeatureConfig()
    model: ModelConfig = ModelConfig()
    train: TrainConfig = TrainConfig()
    output_dir: Optional[str] = None
    seed: Optional[int] = None  # when set, overrides generate.seed and train.seed

    model_config = ConfigDict(extra="forbid")


class Manifest(BaseModel):
    """Provenance record written next to every run's outputs"""

    command: str
    created_at: datetime
    config_hash: str
    seed: Optional[int] = None
    config: Dict[str, Any]
    inputs: Dict[str, str] = {}
    outputs: List[str] = []
    version: int = 1
