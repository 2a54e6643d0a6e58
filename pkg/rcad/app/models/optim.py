"""Gradient-descent optimizers over parameter tensors"""

from typing import Dict, Sequence, Tuple

import numpy as np

from app.core.exceptions import ContractError
from app.core.tensor import Tensor

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


def adam_step(
    param: np.ndarray,
    grad: np.ndarray,
    moments: Tuple[np.ndarray, np.ndarray],
    t: int,
    lr: float,
) -> Tuple[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """One bias-corrected Adam update; returns new values and moments"""
    if t < 1:
        raise ContractError(f"Adam step counter starts at 1, got {t}")
    m, v = moments
    m = BETA1 * m + (1.0 - BETA1) * grad
    v = BETA2 * v + (1.0 - BETA2) * grad * grad
    m_hat = m / (1.0 - BETA1**t)
    v_hat = v / (1.0 - BETA2**t)
    return param - lr * m_hat / (np.sqrt(v_hat) + EPSILON), (m, v)


class Sgd:
    """Plain gradient descent: p ← p − lr·g"""

    def __init__(self, lr: float) -> None:
        self.lr = lr

    def step(self, params: Sequence[Tensor]) -> None:
        for tensor in params:
            if tensor.grad is not None:
                tensor.data -= self.lr * tensor.grad


class Adam:
    """Adam with per-tensor first and second moments"""

    def __init__(self, lr: float) -> None:
        self.lr = lr
        self.t = 0
        self.moments: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

    def step(self, params: Sequence[Tensor]) -> None:
        self.t += 1
        for position, tensor in enumerate(params):
            if tensor.grad is None:
                continue
            moments = self.moments.get(position)
            if moments is None:
                moments = (np.zeros_like(tensor.data), np.zeros_like(tensor.data))
            updated, self.moments[position] = adam_step(
                tensor.data, tensor.grad, moments, self.t, self.lr
            )
            tensor.data[...] = updated


def make_optimizer(name: str, lr: float):
    if name == "sgd":
        return Sgd(lr)
    if name == "adam":
        return Adam(lr)
    raise ContractError(f"Unknown optimizer '{name}'")
