"""Reverse-mode automatic differentiation with higher-order support."""
from .graph import Graph, current_graph, is_grad_enabled, no_grad, set_grad_enabled
from .tensor import Function, Tensor, as_tensor, forward_op
from .backprop import GradientMap, backward, grad, hessian_vector_product
from .gradcheck import finite_difference_check

__all__ = [
    'Graph',
    'current_graph',
    'is_grad_enabled',
    'no_grad',
    'set_grad_enabled',
    'Function',
    'Tensor',
    'as_tensor',
    'forward_op',
    'GradientMap',
    'backward',
    'grad',
    'hessian_vector_product',
    'finite_difference_check',
]
