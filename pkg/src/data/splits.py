"""Leave-one-domain-out partitioning."""
from collections import OrderedDict
from typing import List, Tuple

from ..utils.errors import ContractError
from .sample import Sample
from .synth import Dataset


def leave_one_out(dataset: Dataset, held_out: str) -> Tuple["OrderedDict[str, List[Sample]]", List[Sample]]:
    """Split a dataset into source domains and one unseen target domain.

    Args:
        dataset: Generated or loaded dataset
        held_out: Domain id to hold out

    Returns:
        (sources by domain id, target samples)
    """
    if held_out not in dataset.domains:
        raise ContractError(f"unknown domain {held_out}; have {dataset.domain_ids}")
    sources = OrderedDict((domain, list(samples)) for domain, samples in dataset.domains.items()
                          if domain != held_out)
    return sources, list(dataset.domains[held_out])
