"""Central-difference verification of backpropagated gradients"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.ops import softmax_crossentropy
from app.core.rng import stream
from app.core.tensor import Tape, backward, zero_grad
from app.models.network import ModelParams, forward_model, init_params
from app.schemas.models import ModelSpec

EPSILON = 1e-5
TOLERANCE = 1e-4

GradHook = Callable[[str, np.ndarray], np.ndarray]


@dataclass
class GradCheckResult:
    name: str
    size: int
    max_error: float
    passed: bool


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    return np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))


def default_case(variant: str, seed: int = 0) -> Tuple[ModelSpec, ModelParams, np.ndarray, np.ndarray]:
    """Small fixed problem: input 3, hidden 4 (then 3 for the hybrid GRU), T 5, batch 2"""
    hidden = [4, 3] if variant == "hybrid" else [4]
    spec = ModelSpec(variant=variant, input_size=3, hidden_sizes=hidden, num_classes=2, dropout_rate=0.0)
    rng = stream(seed, "gradcheck")
    features = rng.normal(size=(2, 5, 3))
    labels = np.array([0, 1])
    return spec, init_params(spec, seed), features, labels


def check_gradients(
    spec: ModelSpec,
    params: ModelParams,
    features: np.ndarray,
    labels: np.ndarray,
    eps: float = EPSILON,
    tolerance: float = TOLERANCE,
    names: Optional[Sequence[str]] = None,
    hook: Optional[GradHook] = None,
) -> List[GradCheckResult]:
    """Compare backprop gradients with central differences for every tensor.

    ``hook`` receives each analytic gradient before comparison and may alter
    it; it exists to prove the harness notices a wrong gradient.
    """
    named = [(n, t) for n, t in params.named_tensors() if names is None or n in names]

    def loss() -> float:
        return softmax_crossentropy(forward_model(spec, params, features), labels).item()

    zero_grad(params.tensors())
    with Tape() as tape:
        value = softmax_crossentropy(forward_model(spec, params, features), labels)
    backward(tape, value)

    results = []
    for name, tensor in named:
        analytic = tensor.grad.copy() if tensor.grad is not None else np.zeros_like(tensor.data)
        if hook is not None:
            analytic = hook(name, analytic)
        numeric = np.zeros_like(tensor.data)
        flat = tensor.data.reshape(-1)
        grad_flat = numeric.reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + eps
            up = loss()
            flat[k] = original - eps
            down = loss()
            flat[k] = original
            grad_flat[k] = (up - down) / (2.0 * eps)
        worst = float(relative_error(analytic, numeric).max())
        results.append(GradCheckResult(name, tensor.size, worst, worst < tolerance))
    return results
