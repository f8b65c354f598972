"""Dense float64 tensors and the differentiable operations over them.

Every backward rule is written with Tensor operations, so when gradients are
computed with recording switched on the backward pass is itself recorded and
can be differentiated again (reverse-over-reverse).
"""
from typing import Dict, Optional, Tuple, Type, Union

import numpy as np

from ..utils.errors import ContractError, DimensionError, NumericError
from .graph import current_graph, is_grad_enabled, next_sequence

Shape = Tuple[int, ...]


def _check_finite(data: np.ndarray, kind: str) -> None:
    if not np.all(np.isfinite(data)):
        raise NumericError(f"{kind} produced non-finite values")


class Tensor:
    """n-dimensional array of 64-bit floats that may take part in a graph."""

    # ndarray (op) Tensor must defer to the Tensor's reflected operator
    __array_ufunc__ = None

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        array = np.array(data, dtype=np.float64)
        _check_finite(array, "tensor construction")
        self.data = array
        self.requires_grad = bool(requires_grad)
        self.name = name
        self.node = None

    @classmethod
    def _from_op(cls, data: np.ndarray) -> "Tensor":
        tensor = cls.__new__(cls)
        tensor.data = data
        tensor.requires_grad = False
        tensor.name = None
        tensor.node = None
        return tensor

    @property
    def shape(self) -> Shape:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def node_ref(self) -> Optional[int]:
        """Reference of the producing node in its graph; None for leaves and constants."""
        return None if self.node is None else self.node.ref

    @property
    def is_leaf(self) -> bool:
        return self.node is None

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single element, tensor has shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def detach(self) -> "Tensor":
        """Untracked copy holding the same values."""
        return Tensor._from_op(self.data.copy())

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    # arithmetic

    def __add__(self, other) -> "Tensor":
        return Add.apply(self, as_tensor(other))

    def __radd__(self, other) -> "Tensor":
        return Add.apply(as_tensor(other), self)

    def __sub__(self, other) -> "Tensor":
        return Sub.apply(self, as_tensor(other))

    def __rsub__(self, other) -> "Tensor":
        return Sub.apply(as_tensor(other), self)

    def __neg__(self) -> "Tensor":
        return Scale.apply(self, factor=-1.0)

    def __mul__(self, other) -> "Tensor":
        if _is_scalar(other):
            return Scale.apply(self, factor=float(other))
        return Mul.apply(self, as_tensor(other))

    __rmul__ = __mul__

    def __matmul__(self, other) -> "Tensor":
        return MatMul.apply(self, as_tensor(other))

    def __rmatmul__(self, other) -> "Tensor":
        return MatMul.apply(as_tensor(other), self)

    def scale(self, factor: float) -> "Tensor":
        return Scale.apply(self, factor=float(factor))

    # reductions and reshaping

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return Sum.apply(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return Mean.apply(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Reshape.apply(self, shape=tuple(int(s) for s in shape))

    @property
    def T(self) -> "Tensor":
        return Transpose.apply(self)

    def sum_to(self, shape: Shape) -> "Tensor":
        if self.shape == tuple(shape):
            return self
        return SumTo.apply(self, shape=tuple(shape))

    def broadcast_to(self, shape: Shape) -> "Tensor":
        if self.shape == tuple(shape):
            return self
        return BroadcastTo.apply(self, shape=tuple(shape))

    # elementwise

    def relu(self) -> "Tensor":
        return ReLU.apply(self)

    def tanh(self) -> "Tensor":
        return Tanh.apply(self)

    def exp(self) -> "Tensor":
        return Exp.apply(self)

    def logsumexp(self, axis: int = -1) -> "Tensor":
        return LogSumExp.apply(self, axis=axis)

    # indexing

    def gather(self, index) -> "Tensor":
        """Pick one column per row: out[i] = self[i, index[i]]."""
        return Gather.apply(self, index=np.asarray(index, dtype=np.int64))

    def take_rows(self, rows) -> "Tensor":
        """Select rows by position; positions may repeat."""
        return TakeRows.apply(self, rows=np.asarray(rows, dtype=np.int64))


def _is_scalar(value) -> bool:
    return isinstance(value, (int, float, np.floating, np.integer)) and not isinstance(value, bool)


def as_tensor(value) -> Tensor:
    """Wrap constants; tensors pass through unchanged."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


class Function:
    """One differentiable operation and the record of its application."""

    kind = "op"

    def __init__(self, **attrs):
        for key, value in attrs.items():
            setattr(self, key, value)
        self.inputs: Tuple[Tensor, ...] = ()
        self.output: Optional[Tensor] = None
        self.ref: Optional[int] = None
        self.seq: Optional[int] = None

    def forward(self, *arrays: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Must implement forward()")

    def backward(self, grad: Tensor) -> Tuple[Optional[Tensor], ...]:
        raise NotImplementedError("Must implement backward()")

    @classmethod
    def apply(cls, *inputs: Tensor, **attrs) -> Tensor:
        fn = cls(**attrs)
        data = fn.forward(*(t.data for t in inputs))
        _check_finite(data, cls.kind)
        out = Tensor._from_op(data)
        if is_grad_enabled() and any(t.requires_grad for t in inputs):
            fn.inputs = inputs
            fn.output = out
            fn.seq = next_sequence()
            fn.ref = current_graph().record(fn)
            out.requires_grad = True
            out.node = fn
        return out

    def needs(self, position: int) -> bool:
        return self.inputs[position].requires_grad

    def release(self) -> None:
        if self.output is not None:
            self.output.node = None
            self.output.requires_grad = False
        self.inputs = ()
        self.output = None


def _sum_to(array: np.ndarray, shape: Shape) -> np.ndarray:
    if array.shape == shape:
        return array
    lead = array.ndim - len(shape)
    if lead > 0:
        array = array.sum(axis=tuple(range(lead)))
    axes = tuple(i for i, extent in enumerate(shape) if extent == 1 and array.shape[i] != 1)
    if axes:
        array = array.sum(axis=axes, keepdims=True)
    return array.reshape(shape)


def _broadcast(kind: str, a: np.ndarray, b: np.ndarray) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"{kind}: shapes {a.shape} and {b.shape} do not broadcast") from None


class Add(Function):
    kind = "add"

    def forward(self, a, b):
        _broadcast(self.kind, a, b)
        return a + b

    def backward(self, grad):
        a, b = self.inputs
        return (grad.sum_to(a.shape) if self.needs(0) else None,
                grad.sum_to(b.shape) if self.needs(1) else None)


class Sub(Function):
    kind = "sub"

    def forward(self, a, b):
        _broadcast(self.kind, a, b)
        return a - b

    def backward(self, grad):
        a, b = self.inputs
        return (grad.sum_to(a.shape) if self.needs(0) else None,
                (-grad).sum_to(b.shape) if self.needs(1) else None)


class Mul(Function):
    kind = "elementwise-mul"

    def forward(self, a, b):
        _broadcast(self.kind, a, b)
        return a * b

    def backward(self, grad):
        a, b = self.inputs
        return ((grad * b).sum_to(a.shape) if self.needs(0) else None,
                (grad * a).sum_to(b.shape) if self.needs(1) else None)


class Scale(Function):
    kind = "scale"

    def forward(self, a):
        return a * self.factor

    def backward(self, grad):
        return (grad.scale(self.factor),)


class MatMul(Function):
    kind = "matmul"

    def forward(self, a, b):
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise DimensionError(f"matmul: shapes {a.shape} and {b.shape} are not aligned")
        return a @ b

    def backward(self, grad):
        a, b = self.inputs
        return (grad @ b.T if self.needs(0) else None,
                a.T @ grad if self.needs(1) else None)


class Transpose(Function):
    kind = "transpose"

    def forward(self, a):
        if a.ndim != 2:
            raise DimensionError(f"transpose needs a matrix, got shape {a.shape}")
        return a.T.copy()

    def backward(self, grad):
        return (grad.T,)


class Reshape(Function):
    kind = "reshape"

    def forward(self, a):
        try:
            return a.reshape(self.shape).copy()
        except ValueError:
            raise DimensionError(f"cannot reshape {a.shape} into {self.shape}") from None

    def backward(self, grad):
        return (grad.reshape(self.inputs[0].shape),)


def _keepdims_shape(shape: Shape, axis: Optional[int]) -> Shape:
    if axis is None:
        return (1,) * len(shape)
    axis = axis % len(shape)
    return tuple(1 if i == axis else extent for i, extent in enumerate(shape))


class Sum(Function):
    kind = "sum"

    def forward(self, a):
        return np.asarray(np.sum(a, axis=self.axis, keepdims=self.keepdims), dtype=np.float64)

    def backward(self, grad):
        shape = self.inputs[0].shape
        return (grad.reshape(_keepdims_shape(shape, self.axis)).broadcast_to(shape),)


class Mean(Function):
    kind = "mean"

    def forward(self, a):
        if a.size == 0:
            raise ContractError("mean of an empty tensor")
        return np.asarray(np.mean(a, axis=self.axis, keepdims=self.keepdims), dtype=np.float64)

    def backward(self, grad):
        shape = self.inputs[0].shape
        count = int(np.prod(shape)) if self.axis is None else shape[self.axis]
        expanded = grad.reshape(_keepdims_shape(shape, self.axis)).broadcast_to(shape)
        return (expanded.scale(1.0 / count),)


class SumTo(Function):
    kind = "sum-to"

    def forward(self, a):
        return _sum_to(a, self.shape).copy()

    def backward(self, grad):
        return (grad.broadcast_to(self.inputs[0].shape),)


class BroadcastTo(Function):
    kind = "broadcast-to"

    def forward(self, a):
        try:
            return np.broadcast_to(a, self.shape).copy()
        except ValueError:
            raise DimensionError(f"cannot broadcast {a.shape} to {self.shape}") from None

    def backward(self, grad):
        return (grad.sum_to(self.inputs[0].shape),)


class ReLU(Function):
    kind = "relu"

    def forward(self, a):
        return np.maximum(a, 0.0)

    def backward(self, grad):
        # subgradient 0 at exactly 0
        mask = (self.inputs[0].data > 0.0).astype(np.float64)
        return (grad * Tensor._from_op(mask),)


class Tanh(Function):
    kind = "tanh"

    def forward(self, a):
        return np.tanh(a)

    def backward(self, grad):
        y = self.output
        return (grad * (1.0 - y * y),)


class Exp(Function):
    kind = "exp"

    def forward(self, a):
        with np.errstate(over="ignore"):
            return np.exp(a)

    def backward(self, grad):
        return (grad * self.output,)


class LogSumExp(Function):
    kind = "logsumexp"

    def forward(self, a):
        if a.ndim == 0:
            raise DimensionError("logsumexp needs at least one axis")
        peak = np.max(a, axis=self.axis, keepdims=True)
        out = peak + np.log(np.sum(np.exp(a - peak), axis=self.axis, keepdims=True))
        return np.squeeze(out, axis=self.axis)

    def backward(self, grad):
        a = self.inputs[0]
        kept = _keepdims_shape(a.shape, self.axis)
        softmax = (a - self.output.reshape(kept)).exp()
        return (softmax * grad.reshape(kept),)


class Gather(Function):
    kind = "gather"

    def forward(self, a):
        if a.ndim != 2 or self.index.shape != (a.shape[0],):
            raise DimensionError(f"gather: index of shape {self.index.shape} does not fit {a.shape}")
        if np.any(self.index < 0) or np.any(self.index >= a.shape[1]):
            raise ContractError(f"gather: index outside [0, {a.shape[1]})")
        return a[np.arange(a.shape[0]), self.index]

    def backward(self, grad):
        return (Scatter.apply(grad, index=self.index, shape=self.inputs[0].shape),)


class Scatter(Function):
    kind = "scatter"

    def forward(self, g):
        out = np.zeros(self.shape)
        out[np.arange(self.shape[0]), self.index] = g
        return out

    def backward(self, grad):
        return (grad.gather(self.index),)


class TakeRows(Function):
    kind = "take-rows"

    def forward(self, a):
        if a.ndim == 0 or np.any(self.rows < 0) or np.any(self.rows >= a.shape[0]):
            raise DimensionError(f"take_rows: rows outside [0, {a.shape[0] if a.ndim else 0})")
        return a[self.rows]

    def backward(self, grad):
        return (ScatterRows.apply(grad, rows=self.rows, count=self.inputs[0].shape[0]),)


class ScatterRows(Function):
    kind = "scatter-rows"

    def forward(self, g):
        out = np.zeros((self.count,) + g.shape[1:])
        np.add.at(out, self.rows, g)
        return out

    def backward(self, grad):
        return (grad.take_rows(self.rows),)


OPS: Dict[str, Type[Function]] = {
    "add": Add,
    "sub": Sub,
    "scale": Scale,
    "matmul": MatMul,
    "relu": ReLU,
    "tanh": Tanh,
    "exp": Exp,
    "logsumexp": LogSumExp,
    "gather": Gather,
    "sum": Sum,
    "mean": Mean,
    "elementwise-mul": Mul,
    "transpose": Transpose,
    "reshape": Reshape,
    "take-rows": TakeRows,
}


def forward_op(kind: str, *inputs: Union[Tensor, np.ndarray, float], **attrs) -> Tensor:
    """Apply an operation by name.

    Args:
        kind: Operation name, e.g. 'add', 'matmul', 'relu'
        *inputs: Operands; constants are wrapped as untracked tensors
        **attrs: Operation attributes (factor, axis, index, ...)

    Returns:
        Result tensor, recorded in the active graph when any input is tracked
    """
    try:
        op = OPS[kind]
    except KeyError:
        raise ContractError(f"unknown operation kind: {kind}") from None
    tensors = [as_tensor(t) for t in inputs]
    if op is Gather:
        attrs["index"] = np.asarray(attrs["index"], dtype=np.int64)
    if op is TakeRows:
        attrs["rows"] = np.asarray(attrs["rows"], dtype=np.int64)
    if op in (Sum, Mean):
        attrs.setdefault("axis", None)
        attrs.setdefault("keepdims", False)
    if op is LogSumExp:
        attrs.setdefault("axis", -1)
    if op is Scale:
        attrs["factor"] = float(attrs["factor"])
    return op.apply(*tensors, **attrs)
