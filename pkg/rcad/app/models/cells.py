"""LSTM and GRU cells.

Weights follow the batch-row convention: inputs are batch×features rows and
every weight matrix maps rows on the right (``x @ W``), so an input weight has
shape input×hidden and a recurrent weight hidden×hidden.
"""

from dataclasses import dataclass, fields
from typing import List, Optional, Tuple

import numpy as np

from app.core.exceptions import DimensionError
from app.core.ops import add, concat, matmul, mul, one_minus, sigmoid, tanh_act
from app.core.tensor import Tensor

FORGET_BIAS = 1.0


def uniform_init(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int) -> Tensor:
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def constant_init(shape: Tuple[int, ...], value: float = 0.0) -> Tensor:
    return Tensor(np.full(shape, value), requires_grad=True)


@dataclass
class HiddenState:
    """Recurrent state; ``c`` is only carried by LSTM cells"""

    h: Tensor
    c: Optional[Tensor] = None

    @classmethod
    def zeros(cls, batch: int, hidden: int, with_cell: bool = False) -> "HiddenState":
        h = Tensor(np.zeros((batch, hidden)))
        c = Tensor(np.zeros((batch, hidden))) if with_cell else None
        return cls(h, c)


class _CellParams:
    def named_tensors(self, prefix: str = "") -> List[Tuple[str, Tensor]]:
        return [(f"{prefix}{f.name}", getattr(self, f.name)) for f in fields(self)]

    def tensors(self) -> List[Tensor]:
        return [tensor for _, tensor in self.named_tensors()]


@dataclass
class LstmCellParams(_CellParams):
    """Input (i), forget (f), candidate (g) and output (o) gate parameters"""

    W_i: Tensor
    W_f: Tensor
    W_g: Tensor
    W_o: Tensor
    U_i: Tensor
    U_f: Tensor
    U_g: Tensor
    U_o: Tensor
    b_i: Tensor
    b_f: Tensor
    b_g: Tensor
    b_o: Tensor

    def __post_init__(self) -> None:
        n_in, hidden = self.W_i.shape
        for gate in "ifgo":
            self._expect(f"W_{gate}", (n_in, hidden))
            self._expect(f"U_{gate}", (hidden, hidden))
            self._expect(f"b_{gate}", (hidden,))

    def _expect(self, name: str, shape: Tuple[int, ...]) -> None:
        actual = getattr(self, name).shape
        if actual != shape:
            raise DimensionError(f"LSTM {name} has shape {actual}, expected {shape}")

    @property
    def input_size(self) -> int:
        return self.W_i.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.W_i.shape[1]

    @classmethod
    def init(cls, input_size: int, hidden_size: int, rng: np.random.Generator) -> "LstmCellParams":
        """Uniform ±1/√fan_in weights, zero biases, forget bias +1"""
        weights = {}
        for gate in "ifgo":
            weights[f"W_{gate}"] = uniform_init(rng, (input_size, hidden_size), input_size)
            weights[f"U_{gate}"] = uniform_init(rng, (hidden_size, hidden_size), hidden_size)
        for gate in "ifgo":
            weights[f"b_{gate}"] = constant_init((hidden_size,), FORGET_BIAS if gate == "f" else 0.0)
        return cls(**weights)

    @classmethod
    def zeros(cls, input_size: int, hidden_size: int) -> "LstmCellParams":
        weights = {}
        for gate in "ifgo":
            weights[f"W_{gate}"] = constant_init((input_size, hidden_size))
            weights[f"U_{gate}"] = constant_init((hidden_size, hidden_size))
            weights[f"b_{gate}"] = constant_init((hidden_size,))
        return cls(**weights)


@dataclass
class GruCellParams(_CellParams):
    """Reset gate (m), update gate (n) and candidate parameters.

    The candidate weight ``W`` acts on the concatenation [m∘h, x]; its first
    ``hidden`` rows are the recurrent block and the rest the input block.
    """

    W_m: Tensor
    U_m: Tensor
    b_m: Tensor
    W_n: Tensor
    U_n: Tensor
    b_n: Tensor
    W: Tensor
    b: Tensor

    def __post_init__(self) -> None:
        n_in, hidden = self.W_m.shape
        expected = {
            "W_m": (n_in, hidden),
            "U_m": (hidden, hidden),
            "b_m": (hidden,),
            "W_n": (n_in, hidden),
            "U_n": (hidden, hidden),
            "b_n": (hidden,),
            "W": (hidden + n_in, hidden),
            "b": (hidden,),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise DimensionError(f"GRU {name} has shape {actual}, expected {shape}")

    @property
    def input_size(self) -> int:
        return self.W_m.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.W_m.shape[1]

    @classmethod
    def init(cls, input_size: int, hidden_size: int, rng: np.random.Generator) -> "GruCellParams":
        return cls(
            W_m=uniform_init(rng, (input_size, hidden_size), input_size),
            U_m=uniform_init(rng, (hidden_size, hidden_size), hidden_size),
            b_m=constant_init((hidden_size,)),
            W_n=uniform_init(rng, (input_size, hidden_size), input_size),
            U_n=uniform_init(rng, (hidden_size, hidden_size), hidden_size),
            b_n=constant_init((hidden_size,)),
            W=uniform_init(rng, (hidden_size + input_size, hidden_size), hidden_size + input_size),
            b=constant_init((hidden_size,)),
        )

    @classmethod
    def zeros(cls, input_size: int, hidden_size: int) -> "GruCellParams":
        return cls(
            W_m=constant_init((input_size, hidden_size)),
            U_m=constant_init((hidden_size, hidden_size)),
            b_m=constant_init((hidden_size,)),
            W_n=constant_init((input_size, hidden_size)),
            U_n=constant_init((hidden_size, hidden_size)),
            b_n=constant_init((hidden_size,)),
            W=constant_init((hidden_size + input_size, hidden_size)),
            b=constant_init((hidden_size,)),
        )


def _check_step(kind: str, input_size: int, hidden: int, x_t: Tensor, h: Tensor) -> None:
    if x_t.data.ndim != 2 or x_t.shape[1] != input_size:
        raise DimensionError(f"{kind} step expects batch×{input_size} input, got {x_t.shape}")
    if h.shape != (x_t.shape[0], hidden):
        raise DimensionError(
            f"{kind} step expects state {(x_t.shape[0], hidden)}, got {h.shape}"
        )


def _affine(W: Tensor, U: Tensor, b: Tensor, x: Tensor, h: Tensor) -> Tensor:
    return add(add(matmul(x, W), matmul(h, U)), b)


def lstm_step(params: LstmCellParams, x_t: Tensor, state: HiddenState) -> HiddenState:
    """One LSTM update with a forget gate"""
    _check_step("LSTM", params.input_size, params.hidden_size, x_t, state.h)
    if state.c is None or state.c.shape != state.h.shape:
        raise DimensionError("LSTM step needs a cell state shaped like h")
    h = state.h
    i = sigmoid(_affine(params.W_i, params.U_i, params.b_i, x_t, h))
    f = sigmoid(_affine(params.W_f, params.U_f, params.b_f, x_t, h))
    g = tanh_act(_affine(params.W_g, params.U_g, params.b_g, x_t, h))
    o = sigmoid(_affine(params.W_o, params.U_o, params.b_o, x_t, h))
    c = add(mul(f, state.c), mul(i, g))
    return HiddenState(h=mul(o, tanh_act(c)), c=c)


def gru_step(params: GruCellParams, x_t: Tensor, state: HiddenState) -> HiddenState:
    """One GRU update: h_t = (1 − n_t)∘h_{t−1} + n_t∘h̃_t"""
    _check_step("GRU", params.input_size, params.hidden_size, x_t, state.h)
    h = state.h
    m = sigmoid(_affine(params.W_m, params.U_m, params.b_m, x_t, h))
    n = sigmoid(_affine(params.W_n, params.U_n, params.b_n, x_t, h))
    candidate = tanh_act(add(matmul(concat([mul(m, h), x_t]), params.W), params.b))
    return HiddenState(h=add(mul(one_minus(n), h), mul(n, candidate)))
