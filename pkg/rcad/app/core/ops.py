"""Differentiable operations over Tensor.

Each operation computes its result with numpy and, when a tape is active and
an input requires gradients, records a local gradient rule.
"""

from typing import Sequence, Tuple

import numpy as np

from app.core.exceptions import DimensionError, InputError
from app.core.tensor import BackwardRule, Tensor, active_tape


def _emit(op: str, inputs: Sequence[Tensor], result: np.ndarray, rule: BackwardRule) -> Tensor:
    out = Tensor._wrap(result)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        tape.record(op, inputs, out, rule)
    return out


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of an m×k and a k×n tensor"""
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    a_data, b_data = a.data, b.data

    def rule(grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return grad @ b_data.T, a_data.T @ grad

    return _emit("matmul", (a, b), a_data @ b_data, rule)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; ``b`` may also be a bias row added to every row of ``a``"""
    if a.shape == b.shape:
        return _emit("add", (a, b), a.data + b.data, lambda grad: (grad, grad))
    if a.data.ndim == 2 and b.data.ndim == 1 and a.shape[1] == b.shape[0]:
        return _emit(
            "add_bias", (a, b), a.data + b.data, lambda grad: (grad, grad.sum(axis=0))
        )
    raise DimensionError(f"add: cannot add {b.shape} to {a.shape}")


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise (Hadamard) product"""
    _same_shape("mul", a, b)
    a_data, b_data = a.data, b.data
    return _emit("mul", (a, b), a_data * b_data, lambda grad: (grad * b_data, grad * a_data))


def one_minus(x: Tensor) -> Tensor:
    """Elementwise 1 − x"""
    return _emit("one_minus", (x,), 1.0 - x.data, lambda grad: (-grad,))


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-z[positive]))
    exp_z = np.exp(z[~positive])
    out[~positive] = exp_z / (1.0 + exp_z)
    return out


def sigmoid(x: Tensor) -> Tensor:
    """Elementwise logistic function, evaluated without overflow"""
    s = _stable_sigmoid(x.data)
    return _emit("sigmoid", (x,), s, lambda grad: (grad * s * (1.0 - s),))


def tanh_act(x: Tensor) -> Tensor:
    """Elementwise hyperbolic tangent"""
    t = np.tanh(x.data)
    return _emit("tanh", (x,), t, lambda grad: (grad * (1.0 - t * t),))


def concat(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate batch×width tensors along the feature axis"""
    if not parts:
        raise DimensionError("concat: nothing to concatenate")
    rows = parts[0].shape[0]
    for part in parts:
        if part.data.ndim != 2 or part.shape[0] != rows:
            raise DimensionError(
                f"concat: incompatible shapes {[p.shape for p in parts]}"
            )
    bounds = np.cumsum([p.shape[1] for p in parts])[:-1]

    def rule(grad: np.ndarray):
        return tuple(np.split(grad, bounds, axis=1))

    return _emit("concat", tuple(parts), np.concatenate([p.data for p in parts], axis=1), rule)


def time_step(seq: Tensor, t: int) -> Tensor:
    """Slice step ``t`` out of a batch×time×feature tensor"""
    if seq.data.ndim != 3:
        raise DimensionError(f"time_step: expected batch×time×feature, got {seq.shape}")
    if not 0 <= t < seq.shape[1]:
        raise InputError(f"time_step: step {t} outside sequence of length {seq.shape[1]}")
    shape = seq.shape

    def rule(grad: np.ndarray):
        full = np.zeros(shape)
        full[:, t, :] = grad
        return (full,)

    return _emit("time_step", (seq,), seq.data[:, t, :].copy(), rule)


def stack_time(steps: Sequence[Tensor]) -> Tensor:
    """Stack T batch×feature tensors into batch×T×feature"""
    if not steps:
        raise InputError("stack_time: empty sequence")
    first = steps[0].shape
    for step in steps:
        if step.shape != first or step.data.ndim != 2:
            raise DimensionError("stack_time: steps must share one batch×feature shape")

    def rule(grad: np.ndarray):
        return tuple(grad[:, i, :] for i in range(grad.shape[1]))

    return _emit("stack_time", tuple(steps), np.stack([s.data for s in steps], axis=1), rule)


def dropout(x: Tensor, mask: np.ndarray) -> Tensor:
    """Multiply by a fixed (already rescaled) dropout mask"""
    if mask.shape != x.shape:
        raise DimensionError(f"dropout: mask {mask.shape} does not match {x.shape}")
    return _emit("dropout", (x,), x.data * mask, lambda grad: (grad * mask,))


def sum_all(x: Tensor) -> Tensor:
    """Sum of all elements as a scalar tensor"""
    shape = x.shape
    return _emit("sum", (x,), np.asarray(x.data.sum()), lambda grad: (np.full(shape, float(grad)),))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax (inference helper, not recorded)"""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def softmax_crossentropy(logits: Tensor, labels) -> Tensor:
    """Mean negative log-likelihood of ``labels`` under softmax(logits)"""
    if logits.data.ndim != 2:
        raise DimensionError(f"softmax_crossentropy: expected batch×classes, got {logits.shape}")
    batch, classes = logits.shape
    labels = np.asarray(labels)
    if labels.shape != (batch,):
        raise DimensionError(
            f"softmax_crossentropy: labels shape {labels.shape} does not match batch of {batch}"
        )
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.equal(np.mod(labels, 1), 0)):
            raise InputError("softmax_crossentropy: labels must be class indices")
        labels = labels.astype(np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise InputError(f"softmax_crossentropy: labels must lie in [0, {classes})")

    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(batch)
    loss = np.mean(log_norm - shifted[rows, labels])
    probs = np.exp(shifted - log_norm[:, None])

    def rule(grad: np.ndarray):
        local = probs.copy()
        local[rows, labels] -= 1.0
        return (local * (float(grad) / batch),)

    return _emit("softmax_crossentropy", (logits,), np.asarray(loss), rule)
