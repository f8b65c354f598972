"""Classifier, loss and optimizer."""
from .mlp import LayerSpec, ModelParams, accuracy, forward, init_params, predict, zero_params
from .losses import cross_entropy
from .optimizer import OptimizerState, sgd_step
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    'LayerSpec',
    'ModelParams',
    'accuracy',
    'forward',
    'init_params',
    'predict',
    'zero_params',
    'cross_entropy',
    'OptimizerState',
    'sgd_step',
    'load_checkpoint',
    'save_checkpoint',
]
