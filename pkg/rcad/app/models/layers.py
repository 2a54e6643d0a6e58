"""Recurrent layers over batch×time×feature sequences"""

from typing import List, Union

import numpy as np

from app.core.exceptions import DimensionError, InputError
from app.core.ops import concat, stack_time, time_step
from app.core.tensor import Tensor
from app.models.cells import (
    GruCellParams,
    HiddenState,
    LstmCellParams,
    gru_step,
    lstm_step,
)


def as_sequence(seq: Union[Tensor, np.ndarray], input_size: int) -> Tensor:
    """Validate a batch×time×feature input, wrapping raw arrays as constants"""
    if not isinstance(seq, Tensor):
        array = np.asarray(seq, dtype=np.float64)
        if array.ndim == 3 and array.shape[1] == 0:
            raise InputError("Sequence must have at least one time step")
        if array.ndim == 3 and array.shape[0] == 0:
            raise InputError("Sequence batch is empty")
        seq = Tensor(array)
    if seq.data.ndim != 3:
        raise DimensionError(f"Expected batch×time×feature sequence, got {seq.shape}")
    if seq.shape[1] < 1:
        raise InputError("Sequence must have at least one time step")
    if seq.shape[2] != input_size:
        raise DimensionError(f"Sequence has {seq.shape[2]} features, layer expects {input_size}")
    return seq


def lstm_layer(params: LstmCellParams, seq: Union[Tensor, np.ndarray], reverse: bool = False) -> List[Tensor]:
    """Hidden states of one LSTM pass, returned in time order"""
    seq = as_sequence(seq, params.input_size)
    batch, steps, _ = seq.shape
    state = HiddenState.zeros(batch, params.hidden_size, with_cell=True)
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    outputs: List[Tensor] = [None] * steps  # type: ignore[list-item]
    for t in order:
        state = lstm_step(params, time_step(seq, t), state)
        outputs[t] = state.h
    return outputs


def gru_layer(params: GruCellParams, seq: Union[Tensor, np.ndarray]) -> List[Tensor]:
    """Hidden states of a forward GRU pass"""
    seq = as_sequence(seq, params.input_size)
    batch, steps, _ = seq.shape
    state = HiddenState.zeros(batch, params.hidden_size)
    outputs: List[Tensor] = []
    for t in range(steps):
        state = gru_step(params, time_step(seq, t), state)
        outputs.append(state.h)
    return outputs


def bilstm_layer(fwd: LstmCellParams, bwd: LstmCellParams, seq: Union[Tensor, np.ndarray]) -> Tensor:
    """Per-step concatenation [forward h_t, backward h_t] as batch×T×2·hidden"""
    if fwd.input_size != bwd.input_size or fwd.hidden_size != bwd.hidden_size:
        raise DimensionError("Forward and backward LSTM parameters must share sizes")
    seq = as_sequence(seq, fwd.input_size)
    forward = lstm_layer(fwd, seq)
    backward = lstm_layer(bwd, seq, reverse=True)
    return stack_time([concat([f, b]) for f, b in zip(forward, backward)])
