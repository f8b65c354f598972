"""SGD with momentum, weight decay and a one-step learning-rate decay."""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from typing import Dict, Mapping, Tuple

import numpy as np

from ..autodiff import Tensor
from ..utils.errors import ContractError, DimensionError
from .mlp import ModelParams

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """Optimizer hyper-parameters plus one velocity buffer per parameter."""
    lr: float = 0.001
    momentum: float = 0.9
    weight_decay: float = 5e-4
    decay_factor: float = 0.1
    decay_at: float = 0.8
    velocity: Dict[str, np.ndarray] = field(default_factory=dict)

    def lr_at(self, epoch_fraction: float) -> float:
        """Learning rate in effect at a point of training."""
        return self.lr * self.decay_factor if epoch_fraction >= self.decay_at else self.lr

    @classmethod
    def for_params(cls, params: Mapping, **hyper) -> "OptimizerState":
        state = cls(**hyper)
        state.velocity = {name: np.zeros(t.shape) for name, t in params.items()}
        return state


def sgd_step(params: ModelParams, grads: Mapping, state: OptimizerState,
             epoch_fraction: float) -> Tuple[ModelParams, OptimizerState]:
    """One optimizer step.

    v <- momentum * v + (g + weight_decay * p); p <- p - lr(t) * v

    Args:
        params: Current parameters
        grads: Gradient per parameter name (tensors or arrays)
        state: Optimizer state; not modified
        epoch_fraction: Completed fraction of training, selects lr(t)

    Returns:
        New leaf parameters and the new optimizer state
    """
    lr = state.lr_at(epoch_fraction)
    velocity = {}
    tensors = OrderedDict()
    for name, p in params.items():
        if name not in grads:
            raise ContractError(f"no gradient for parameter {name}")
        g = grads[name]
        g = g.data if isinstance(g, Tensor) else np.asarray(g, dtype=np.float64)
        if g.shape != p.shape:
            raise DimensionError(f"gradient for {name} has shape {g.shape}, parameter has {p.shape}")
        v = state.velocity.get(name)
        v = np.zeros(p.shape) if v is None else v
        v = state.momentum * v + (g + state.weight_decay * p.data)
        velocity[name] = v
        tensors[name] = Tensor(p.data - lr * v, requires_grad=p.requires_grad, name=name)
    return ModelParams(params.spec, tensors), replace(state, velocity=velocity)
