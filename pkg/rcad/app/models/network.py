"""Bi-LSTM, GRU and hybrid sequence classifiers"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from app.core.exceptions import ConfigurationError, InputError
from app.core.ops import add, dropout, matmul, softmax, time_step
from app.core.rng import stream
from app.core.tensor import Tensor
from app.models.cells import GruCellParams, LstmCellParams, constant_init, uniform_init
from app.models.layers import as_sequence, bilstm_layer, gru_layer
from app.schemas.models import ModelSpec
from app.schemas.preprocessing import ScalerState

INFERENCE_CHUNK = 256


@dataclass
class ModelParams:
    """Learnable tensors of one model, plus the input scaler fit at training time"""

    head_W: Tensor
    head_b: Tensor
    bilstm_fwd: Optional[LstmCellParams] = None
    bilstm_bwd: Optional[LstmCellParams] = None
    gru: Optional[GruCellParams] = None
    scaler: Optional[ScalerState] = field(default=None, compare=False)

    def named_tensors(self) -> List[Tuple[str, Tensor]]:
        """Every learnable tensor exactly once, in a fixed order"""
        named: List[Tuple[str, Tensor]] = []
        if self.bilstm_fwd is not None:
            named += self.bilstm_fwd.named_tensors("bilstm.fwd.")
        if self.bilstm_bwd is not None:
            named += self.bilstm_bwd.named_tensors("bilstm.bwd.")
        if self.gru is not None:
            named += self.gru.named_tensors("gru.")
        named += [("head.W", self.head_W), ("head.b", self.head_b)]
        return named

    def tensors(self) -> List[Tensor]:
        return [tensor for _, tensor in self.named_tensors()]

    def copy(self) -> "ModelParams":
        values = {name: tensor.data.copy() for name, tensor in self.named_tensors()}
        return ModelParams.from_arrays(values, self.scaler)

    @classmethod
    def from_arrays(
        cls, arrays: Mapping[str, np.ndarray], scaler: Optional[ScalerState] = None
    ) -> "ModelParams":
        """Rebuild from ``named_tensors`` names, e.g. when loading a checkpoint"""

        def take(prefix: str) -> Dict[str, Tensor]:
            return {
                name[len(prefix):]: Tensor(value, requires_grad=True)
                for name, value in arrays.items()
                if name.startswith(prefix)
            }

        try:
            fwd, bwd, gru = take("bilstm.fwd."), take("bilstm.bwd."), take("gru.")
            return cls(
                head_W=Tensor(arrays["head.W"], requires_grad=True),
                head_b=Tensor(arrays["head.b"], requires_grad=True),
                bilstm_fwd=LstmCellParams(**fwd) if fwd else None,
                bilstm_bwd=LstmCellParams(**bwd) if bwd else None,
                gru=GruCellParams(**gru) if gru else None,
                scaler=scaler,
            )
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"Incomplete parameter set: {exc}") from exc


def _head_width(spec: ModelSpec) -> int:
    if spec.variant == "bilstm":
        return 2 * spec.hidden_sizes[0]
    if spec.variant == "gru":
        return spec.hidden_sizes[0]
    return spec.hidden_sizes[1]


def init_params(spec: ModelSpec, seed: int = 0) -> ModelParams:
    """Seeded initialization: uniform ±1/√fan_in weights, forget bias +1"""
    rng = stream(seed, "init")
    first = spec.hidden_sizes[0]
    fwd = bwd = gru = None
    if spec.variant in ("bilstm", "hybrid"):
        fwd = LstmCellParams.init(spec.input_size, first, rng)
        bwd = LstmCellParams.init(spec.input_size, first, rng)
    if spec.variant == "gru":
        gru = GruCellParams.init(spec.input_size, first, rng)
    if spec.variant == "hybrid":
        gru = GruCellParams.init(2 * first, spec.hidden_sizes[1], rng)
    width = _head_width(spec)
    return ModelParams(
        head_W=uniform_init(rng, (width, spec.num_classes), width),
        head_b=constant_init((spec.num_classes,)),
        bilstm_fwd=fwd,
        bilstm_bwd=bwd,
        gru=gru,
    )


def check_params(spec: ModelSpec, params: ModelParams) -> None:
    """Raise ConfigurationError unless ``params`` realizes ``spec``"""
    has_lstm = params.bilstm_fwd is not None and params.bilstm_bwd is not None
    has_gru = params.gru is not None
    wanted = {"bilstm": (True, False), "gru": (False, True), "hybrid": (True, True)}[spec.variant]
    if (has_lstm, has_gru) != wanted:
        raise ConfigurationError(f"Parameters do not match the {spec.variant} variant")

    first = spec.hidden_sizes[0]
    if has_lstm:
        for cell in (params.bilstm_fwd, params.bilstm_bwd):
            if (cell.input_size, cell.hidden_size) != (spec.input_size, first):
                raise ConfigurationError(
                    f"LSTM sizes {(cell.input_size, cell.hidden_size)} do not match "
                    f"spec {(spec.input_size, first)}"
                )
    if has_gru:
        expected = (
            (spec.input_size, first)
            if spec.variant == "gru"
            else (2 * first, spec.hidden_sizes[1])
        )
        if (params.gru.input_size, params.gru.hidden_size) != expected:
            raise ConfigurationError(
                f"GRU sizes {(params.gru.input_size, params.gru.hidden_size)} do not match {expected}"
            )
    head = (_head_width(spec), spec.num_classes)
    if params.head_W.shape != head or params.head_b.shape != (spec.num_classes,):
        raise ConfigurationError(f"Head shape {params.head_W.shape} does not match {head}")


def _drop(x: Tensor, rate: float, rng: Optional[np.random.Generator]) -> Tensor:
    if rng is None or rate == 0.0:
        return x
    keep = rng.random(x.shape) >= rate
    return dropout(x, keep / (1.0 - rate))


def forward_model(
    spec: ModelSpec,
    params: ModelParams,
    seq: Union[Tensor, np.ndarray],
    train: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """Logits (batch×classes) for a batch of sequences.

    Dropout is applied between layers only when ``train`` is set and a
    generator is supplied.
    """
    check_params(spec, params)
    seq = as_sequence(seq, spec.input_size)
    drop_rng = rng if train else None
    rate = spec.dropout_rate

    if spec.variant == "gru":
        features = gru_layer(params.gru, seq)[-1]
    else:
        outputs = bilstm_layer(params.bilstm_fwd, params.bilstm_bwd, seq)
        if spec.variant == "bilstm":
            features = time_step(outputs, outputs.shape[1] - 1)
        else:
            features = gru_layer(params.gru, _drop(outputs, rate, drop_rng))[-1]
    features = _drop(features, rate, drop_rng)
    return add(matmul(features, params.head_W), params.head_b)


def predict_proba(spec: ModelSpec, params: ModelParams, features: np.ndarray) -> np.ndarray:
    """Class probabilities over frozen parameters, computed in chunks"""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 3 or features.shape[0] == 0:
        raise InputError("Nothing to predict: expected a non-empty samples×time×features array")
    chunks = [
        softmax(forward_model(spec, params, features[start:start + INFERENCE_CHUNK]).data)
        for start in range(0, features.shape[0], INFERENCE_CHUNK)
    ]
    return np.concatenate(chunks, axis=0)
