"""Seeded random streams."""
from typing import Dict, Sequence

import numpy as np

RUN_STREAMS = ("init", "batches", "augment", "game", "pool")


def spawn_streams(seed: int, names: Sequence[str] = RUN_STREAMS) -> Dict[str, np.random.Generator]:
    """Expand one seed into independent named generators.

    Each component of a run draws from its own stream, so switching a
    component off never changes what the others draw.

    Args:
        seed: Run seed
        names: Stream names, in a fixed order

    Returns:
        Mapping from stream name to generator
    """
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(child) for name, child in zip(names, children)}
