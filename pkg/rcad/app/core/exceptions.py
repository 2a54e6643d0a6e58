"""Exceptions raised by the rcad library"""

from typing import Optional


class RcadError(Exception):
    """Base class for all library errors"""


class DimensionError(RcadError, ValueError):
    """Tensor shapes do not agree"""


class InputError(RcadError, ValueError):
    """Input values violate an operation's precondition"""


class ContractError(RcadError):
    """An operation was called outside its contract"""


class SchemaError(RcadError, ValueError):
    """Table columns do not match what an operation expects"""


class DegenerateColumnError(RcadError, ValueError):
    """A column carries no usable values"""


class ConfigurationError(RcadError, ValueError):
    """A model spec, parameter set or run config is inconsistent"""


class UndefinedMetricError(RcadError, ValueError):
    """A metric cannot be computed from the given data"""


class RunExistsError(RcadError):
    """An output directory already exists and overwriting was not requested"""


class NonFiniteLossError(RcadError, FloatingPointError):
    """Training produced a NaN or infinite loss"""

    def __init__(self, epoch: int, batch: int, loss: float, variant: Optional[str] = None):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        self.variant = variant
        where = f" ({variant})" if variant else ""
        super().__init__(
            f"Non-finite loss {loss!r} at epoch {epoch}, batch {batch}{where}"
        )
