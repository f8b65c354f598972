"""Supervision loss over the batch minus the discarded samples."""
import logging
from typing import Iterable, Sequence

from ..autodiff import Tensor
from ..data.sample import Sample, labels_of, stack_features
from ..model import ModelParams, cross_entropy, forward
from ..utils.errors import ContractError

logger = logging.getLogger(__name__)


def filtered_supervision(params: ModelParams, batch: Sequence[Sample],
                         discard: Iterable[str] = ()) -> Tensor:
    """Mean cross-entropy over batch samples whose id is not discarded."""
    discard = set(discard)
    kept = [s for s in batch if s.id not in discard]
    if not kept:
        raise ContractError(f"all {len(batch)} batch samples were filtered; k must be below the batch size")
    if discard:
        logger.debug(f"supervision on {len(kept)}/{len(batch)} samples")
    return cross_entropy(forward(params, stack_features(kept)), labels_of(kept), reduction="mean")
