"""One training iteration as a convex coalition game."""
from .models import ClassifierGame, GameModel
from .coalitions import (CoalitionInputs, CoalitionQuad, MetaSplit, fit_coalition_sizes,
                         meta_split, sample_coalitions)
from .regularizer import (GameConfig, GameOutcome, coalition_loss, maml_regularizer,
                          meta_test_loss, play, supermodularity_loss, virtual_update)

__all__ = [
    'ClassifierGame',
    'GameModel',
    'CoalitionInputs',
    'CoalitionQuad',
    'MetaSplit',
    'fit_coalition_sizes',
    'meta_split',
    'sample_coalitions',
    'GameConfig',
    'GameOutcome',
    'coalition_loss',
    'maml_regularizer',
    'meta_test_loss',
    'play',
    'supermodularity_loss',
    'virtual_update',
]
