"""Classification loss."""
from typing import Sequence

import numpy as np

from ..autodiff import Tensor
from ..utils.errors import ContractError, DimensionError

REDUCTIONS = ("mean", "sum", "none")


def cross_entropy(logits: Tensor, labels: Sequence[int], reduction: str = "mean") -> Tensor:
    """-log softmax(logits)[label] per row, reduced.

    Args:
        logits: Tensor of shape (n, C)
        labels: n class indices in [0, C)
        reduction: 'mean' over rows, 'sum' over rows, or 'none' for per-row losses

    Returns:
        Scalar tensor, or shape (n,) for reduction='none'
    """
    if reduction not in REDUCTIONS:
        raise ContractError(f"reduction must be one of {REDUCTIONS}, got {reduction}")
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if logits.ndim != 2 or labels.shape[0] != logits.shape[0]:
        raise DimensionError(f"{labels.shape[0]} labels for logits of shape {logits.shape}")
    num_classes = logits.shape[1]
    bad = labels[(labels < 0) | (labels >= num_classes)]
    if bad.size:
        raise ContractError(f"label {int(bad[0])} outside [0, {num_classes})")
    per_sample = logits.logsumexp(axis=1) - logits.gather(labels)
    if reduction == "none":
        return per_sample
    if reduction == "sum":
        return per_sample.sum()
    return per_sample.mean()
