"""Checkpoint repository"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np
from pydantic import ValidationError

from app.core.exceptions import ConfigurationError, InputError, SchemaError
from app.models.network import ModelParams, check_params
from app.schemas.models import (
    CHECKPOINT_FORMAT,
    CHECKPOINT_VERSION,
    CheckpointDocument,
    ModelSpec,
    TensorEntry,
)


@dataclass
class Checkpoint:
    """A trained model as stored on disk"""

    spec: ModelSpec
    params: ModelParams
    feature_names: List[str]


def dumps_checkpoint(checkpoint: Checkpoint) -> str:
    """Serialize to JSON; float64 values survive the round trip exactly"""
    document = CheckpointDocument(
        format=CHECKPOINT_FORMAT,
        version=CHECKPOINT_VERSION,
        spec=checkpoint.spec,
        features=list(checkpoint.feature_names),
        scaler=checkpoint.params.scaler,
        tensors={
            name: TensorEntry(shape=list(tensor.shape), values=tensor.data.reshape(-1).tolist())
            for name, tensor in checkpoint.params.named_tensors()
        },
    )
    return document.model_dump_json() + "\n"


def loads_checkpoint(text: str) -> Checkpoint:
    try:
        document = CheckpointDocument.model_validate_json(text)
    except ValidationError as exc:
        raise SchemaError(f"Not a readable rcad checkpoint: {_first_error(exc)}") from exc

    arrays = {
        name: np.asarray(entry.values, dtype=np.float64).reshape(entry.shape)
        for name, entry in document.tensors.items()
    }
    spec = document.spec
    params = ModelParams.from_arrays(arrays, document.scaler)
    check_params(spec, params)
    if document.features and len(document.features) != spec.input_size:
        raise ConfigurationError(
            f"Checkpoint lists {len(document.features)} features for input size {spec.input_size}"
        )
    return Checkpoint(spec=spec, params=params, feature_names=list(document.features))


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    where = ".".join(str(part) for part in error["loc"])
    return f"{where}: {error['msg']}" if where else error["msg"]


def save_checkpoint(checkpoint: Checkpoint, path: Union[str, Path]) -> None:
    """Write a checkpoint file"""
    check_params(checkpoint.spec, checkpoint.params)
    try:
        Path(path).write_text(dumps_checkpoint(checkpoint), encoding="utf-8")
    except OSError as exc:
        raise InputError(f"Cannot write {path}: {exc.strerror}") from exc


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Read a checkpoint file and check it against its own spec"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"Cannot read {path}: {exc.strerror}") from exc
    return loads_checkpoint(text)
