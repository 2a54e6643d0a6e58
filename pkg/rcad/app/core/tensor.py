"""Dense float64 tensors and a define-by-run gradient tape.

A ``Tape`` used as a context manager becomes the active tape; every
differentiable operation in ``app.core.ops`` executed while it is active, and
touching at least one tensor that requires gradients, is appended to it.
``backward`` then walks the recorded operations in exact reverse order.
Outside a tape nothing is recorded, which is how inference runs.
"""

from contextvars import ContextVar
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ContractError, DimensionError, InputError

MAX_RANK = 3

BackwardRule = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Tensor:
    """Dense row-major array of 64-bit floats with a lazily allocated gradient"""

    __slots__ = ("data", "grad", "requires_grad", "node_id", "name")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        name: Optional[str] = None,
    ) -> None:
        array = np.array(data, dtype=np.float64)
        if array.ndim > MAX_RANK:
            raise DimensionError(f"Tensor rank {array.ndim} exceeds {MAX_RANK}")
        if any(extent < 1 for extent in array.shape):
            raise DimensionError(f"Tensor extents must be positive, got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise InputError("Tensor values must be finite (NaN/Inf rejected)")
        self.data = array
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.node_id: Optional[int] = None
        self.name = name

    @classmethod
    def _wrap(cls, array: np.ndarray) -> "Tensor":
        """Wrap an operation result without copying or validating it"""
        tensor = cls.__new__(cls)
        tensor.data = array
        tensor.grad = None
        tensor.requires_grad = False
        tensor.node_id = None
        tensor.name = None
        return tensor

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def values(self) -> np.ndarray:
        """Flat row-major view of the values"""
        return self.data.reshape(-1)

    def item(self) -> float:
        if self.size != 1:
            raise ContractError(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"


@dataclass
class TapeEntry:
    """One recorded operation"""

    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule


_ACTIVE_TAPE: ContextVar[Optional["Tape"]] = ContextVar("rcad_active_tape", default=None)


class Tape:
    """Ordered record of differentiable operations"""

    def __init__(self) -> None:
        self.entries: List[TapeEntry] = []
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE_TAPE.reset(self._token)
        self._token = None

    def __len__(self) -> int:
        return len(self.entries)

    def record(
        self, op: str, inputs: Sequence[Tensor], output: Tensor, backward: BackwardRule
    ) -> None:
        output.node_id = len(self.entries)
        output.requires_grad = True
        self.entries.append(TapeEntry(op, tuple(inputs), output, backward))


def active_tape() -> Optional[Tape]:
    """Return the tape currently recording, if any"""
    return _ACTIVE_TAPE.get()


def backward(tape: Tape, loss: Tensor) -> None:
    """Populate ``grad`` of every tensor reachable from ``loss``.

    Gradients of one pass are summed over fan-out first and then added to the
    existing buffers, so running the same tape twice doubles them exactly.
    """
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")

    pending = {id(loss): np.ones_like(loss.data)}
    reached = {id(loss): loss}
    for entry in reversed(tape.entries):
        upstream = pending.get(id(entry.output))
        if upstream is None:
            continue
        local = entry.backward(upstream)
        for tensor, grad in zip(entry.inputs, local):
            if grad is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            if key in pending:
                pending[key] = pending[key] + grad
            else:
                pending[key] = grad
                reached[key] = tensor

    for key, grad in pending.items():
        tensor = reached[key]
        if tensor.grad is None:
            tensor.grad = np.zeros_like(tensor.data)
        tensor.grad += grad


def zero_grad(tensors: Iterable[Tensor]) -> None:
    """Reset gradient buffers to zero"""
    for tensor in tensors:
        if tensor.grad is not None:
            tensor.grad.fill(0.0)
