"""Quadratic surrogate: a game model whose supermodularity gap is known exactly.

Meta-train losses are linear in θ (x_i · g_iᵀθ), so ∇F is constant, and the
meta-test loss is ½θᵀHθ. Every Taylor term beyond the second vanishes and
the raw gap reduces to a closed form.
"""
from collections import OrderedDict
from typing import Iterable, List, Optional, Union

import numpy as np

from ..autodiff import Tensor
from ..data.sample import Origin, Sample
from ..game.models import GameModel
from ..game.regularizer import GameConfig
from ..utils.errors import ContractError, DimensionError

SURROGATE_DOMAIN = "surrogate"


class QuadraticSurrogate(GameModel):
    """
    Drop-in game model with an analytically solvable gap.

    Args:
        H: Symmetric (d, d) Hessian of the meta-test loss
        gradients: (n, d) per-sample meta-train gradients g_i
        alpha: Virtual step size
        inputs: Optional per-sample scalar inputs x_i (default 1)
    """

    def __init__(self, H, gradients, alpha: float, inputs: Optional[Iterable[float]] = None):
        H = np.atleast_2d(np.asarray(H, dtype=np.float64))
        gradients = np.atleast_2d(np.asarray(gradients, dtype=np.float64))
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
            raise DimensionError(f"H must be square, got shape {H.shape}")
        if np.max(np.abs(H - H.T)) > 1e-12:
            raise ContractError("H must be symmetric")
        if gradients.shape[1] != H.shape[0]:
            raise DimensionError(f"gradients of shape {gradients.shape} do not match H of size {H.shape[0]}")
        if alpha <= 0:
            raise ContractError(f"alpha must be positive, got {alpha}")
        self.H = H
        self.gradients = gradients
        self.alpha = float(alpha)
        self.inputs = np.ones(len(gradients)) if inputs is None else np.asarray(list(inputs), dtype=np.float64)
        if self.inputs.shape != (len(gradients),):
            raise DimensionError(f"need {len(gradients)} inputs, got {self.inputs.shape}")

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def samples(self) -> List[Sample]:
        """One 1-pixel sample per gradient; the label indexes the gradient."""
        return [Sample(id=f"g{i:04d}", features=np.full((1, 1, 1), self.inputs[i]), label=i,
                       domain_id=SURROGATE_DOMAIN, origin=Origin.ORIGINAL)
                for i in range(len(self.gradients))]

    def params(self, theta=None) -> "OrderedDict[str, Tensor]":
        theta = np.zeros(self.dim) if theta is None else np.asarray(theta, dtype=np.float64)
        return OrderedDict(theta=Tensor(theta, requires_grad=True, name="theta"))

    def config(self, second_order: bool = True) -> GameConfig:
        return GameConfig(alpha=self.alpha, second_order=second_order)

    def with_alpha(self, alpha: float) -> "QuadraticSurrogate":
        return QuadraticSurrogate(self.H, self.gradients, alpha, self.inputs)

    def sample_losses(self, params, inputs, labels):
        theta = params["theta"]
        rows = Tensor(self.gradients[np.asarray(labels, dtype=np.int64)])
        linear = (rows @ theta.reshape(self.dim, 1)).reshape(len(labels))
        return inputs.reshape(len(labels)) * linear

    def test_loss(self, params, inputs, labels):
        theta = params["theta"]
        column = theta.reshape(self.dim, 1)
        return (column.T @ (Tensor(self.H) @ column)).sum().scale(0.5)


def _indices(coalition: Iterable[Union[Sample, int]]) -> set:
    return {c.label if isinstance(c, Sample) else int(c) for c in coalition}


def closed_form_gap(surrogate: QuadraticSurrogate, S, T) -> float:
    """α² (Σ_{S\\T} x g)ᵀ H (Σ_{T\\S} x g); shared samples cancel.

    Args:
        surrogate: Model
        S, T: Coalitions as surrogate samples or gradient indices
    """
    s, t = _indices(S), _indices(T)
    weighted = surrogate.gradients * surrogate.inputs[:, None]
    left = weighted[sorted(s - t)].sum(axis=0)
    right = weighted[sorted(t - s)].sum(axis=0)
    return float(surrogate.alpha ** 2 * left @ surrogate.H @ right)
