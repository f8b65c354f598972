"""Reverse-mode gradient computation over recorded graphs."""
import logging
from collections import OrderedDict
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np

from ..utils.errors import ContractError, DimensionError, MissingNodeError
from .graph import set_grad_enabled
from .tensor import Tensor

logger = logging.getLogger(__name__)

WrtSpec = Union[Mapping[str, Tensor], Sequence[Tensor]]


class GradientMap(OrderedDict):
    """Parameter name -> gradient tensor, shapes checked on insertion."""

    def __init__(self, shapes: Mapping[str, tuple] = None):
        super().__init__()
        self._shapes = dict(shapes or {})

    def __setitem__(self, key: str, value: Tensor) -> None:
        expected = self._shapes.get(key)
        if expected is not None and tuple(value.shape) != tuple(expected):
            raise DimensionError(
                f"gradient for {key} has shape {value.shape}, parameter has {expected}")
        super().__setitem__(key, value)

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: g.data for name, g in self.items()}


def _topological_nodes(root) -> List:
    seen = set()
    order = []
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        order.append(node)
        for tensor in node.inputs:
            if tensor.node is not None and id(tensor.node) not in seen:
                stack.append(tensor.node)
    # creation order is a valid topological order
    order.sort(key=lambda n: n.seq, reverse=True)
    return order


def grad(output: Tensor, inputs: Sequence[Tensor], create_graph: bool = False) -> List[Tensor]:
    """Gradients of a one-element tensor with respect to each input.

    Args:
        output: One-element tensor to differentiate
        inputs: Grad-tracked tensors
        create_graph: Record the backward pass so the returned gradients can
            be differentiated again

    Returns:
        One gradient per input, same shape as the input. Inputs the output
        does not depend on receive zeros.
    """
    if output.size != 1:
        raise ContractError(f"backward needs a one-element output, got shape {output.shape}")
    for position, tensor in enumerate(inputs):
        if not tensor.requires_grad:
            label = tensor.name or f"input {position}"
            raise MissingNodeError(f"{label} is not grad-tracked; nothing to differentiate")

    grads: Dict[int, Tensor] = {id(output): Tensor._from_op(np.ones(output.shape))}
    if output.node is not None:
        with set_grad_enabled(create_graph):
            for node in _topological_nodes(output.node):
                upstream = grads.get(id(node.output))
                if upstream is None:
                    continue
                for tensor, contribution in zip(node.inputs, node.backward(upstream)):
                    if contribution is None or not tensor.requires_grad:
                        continue
                    previous = grads.get(id(tensor))
                    grads[id(tensor)] = contribution if previous is None else previous + contribution

    result = []
    for tensor in inputs:
        g = grads.get(id(tensor))
        result.append(Tensor._from_op(np.zeros(tensor.shape)) if g is None else g)
    return result


def backward(scalar: Tensor, wrt: WrtSpec, create_graph: bool = False) -> GradientMap:
    """Differentiate a scalar with respect to a named parameter set.

    Args:
        scalar: One-element tensor
        wrt: Mapping name -> tensor, or a sequence of tensors (keyed by
            tensor name, falling back to position)
        create_graph: Keep the returned gradients grad-tracked

    Returns:
        GradientMap with one entry per parameter
    """
    if isinstance(wrt, Mapping):
        names = list(wrt.keys())
        tensors = list(wrt.values())
    else:
        tensors = list(wrt)
        names = [t.name or str(i) for i, t in enumerate(tensors)]
    gradients = grad(scalar, tensors, create_graph=create_graph)
    result = GradientMap({name: t.shape for name, t in zip(names, tensors)})
    for name, g in zip(names, gradients):
        result[name] = g
    return result


def hessian_vector_product(scalar_fn, point: Tensor, direction) -> Tensor:
    """H·v for a scalar function at a point, by differentiating ∇f·v."""
    value = scalar_fn(point)
    (first,) = grad(value, [point], create_graph=True)
    projected = (first * Tensor(direction)).sum()
    (second,) = grad(projected, [point])
    return second
