"""Exception hierarchy shared by every package in the lab."""


class DCGError(Exception):
    """Base class for all errors raised by the lab."""


class ContractError(DCGError, ValueError):
    """A precondition of an operation was violated."""


class DimensionError(ContractError):
    """Operand shapes are incompatible with the requested operation."""


class MissingNodeError(ContractError):
    """Differentiation was requested w.r.t. a tensor that is not grad-tracked."""


class TargetLeakError(ContractError):
    """A held-out domain sample reached a training-side structure."""


class NotDefiniteError(DCGError, ValueError):
    """Matrix is neither positive nor negative definite."""


class NumericError(DCGError, ArithmeticError):
    """An operation produced NaN or Inf."""


class ConfigError(DCGError, ValueError):
    """Configuration values conflict or are out of range."""
