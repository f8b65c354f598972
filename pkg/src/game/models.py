"""Models the coalition game can be played with."""
from abc import ABC, abstractmethod
from typing import Mapping

import numpy as np

from ..autodiff import Tensor
from ..model import LayerSpec, ModelParams, cross_entropy, forward


class GameModel(ABC):
    """
    Interface between the game and a model.

    Parameters are passed as a mapping name -> Tensor so that virtual
    parameters (θ - α∇F) can be fed back in without rebuilding a model.
    """

    @abstractmethod
    def sample_losses(self, params: Mapping[str, Tensor], inputs: Tensor, labels: np.ndarray) -> Tensor:
        """Per-sample meta-train losses, shape (m,)."""
        raise NotImplementedError("Must implement sample_losses()")

    @abstractmethod
    def test_loss(self, params: Mapping[str, Tensor], inputs: Tensor, labels: np.ndarray) -> Tensor:
        """Scalar meta-test loss G averaged over the given samples."""
        raise NotImplementedError("Must implement test_loss()")


class ClassifierGame(GameModel):
    """The MLP classifier with cross-entropy on both sides of the game."""

    def __init__(self, spec: LayerSpec):
        self.spec = spec

    def sample_losses(self, params, inputs, labels):
        return cross_entropy(forward(ModelParams(self.spec, params), inputs), labels, reduction="none")

    def test_loss(self, params, inputs, labels):
        return cross_entropy(forward(ModelParams(self.spec, params), inputs), labels, reduction="mean")
