"""Labeled image samples and their augmentation provenance."""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..utils.errors import ContractError


class Origin(Enum):
    ORIGINAL = "original"
    AUGMENTED = "augmented"


@dataclass(frozen=True)
class Provenance:
    """How an augmented sample was made: phase parent i, amplitude parent j, mix λ."""
    parent_ids: Tuple[str, str]
    parent_domains: Tuple[str, str]
    lam: float

    def to_dict(self) -> Dict:
        return {"parent_ids": list(self.parent_ids),
                "parent_domains": list(self.parent_domains),
                "lam": self.lam}

    @classmethod
    def from_dict(cls, data: Dict) -> "Provenance":
        return cls(tuple(data["parent_ids"]), tuple(data["parent_domains"]), float(data["lam"]))


@dataclass(frozen=True, eq=False)
class Sample:
    """One labeled instance.

    Attributes:
        id: Unique sample identifier
        features: (channels, height, width) floats in [0, 1]
        label: Class index
        domain_id: Source domain, or the fresh domain of an augmented sample
        origin: Original or augmented
        provenance: Parents and λ; present exactly for augmented samples
    """
    id: str
    features: np.ndarray
    label: int
    domain_id: str
    origin: Origin = Origin.ORIGINAL
    provenance: Optional[Provenance] = None

    def __post_init__(self):
        if self.features.ndim != 3 or self.features.size == 0:
            raise ContractError(f"sample {self.id}: features must be (C, H, W), got {self.features.shape}")
        if (self.origin is Origin.AUGMENTED) != (self.provenance is not None):
            raise ContractError(f"sample {self.id}: provenance must be present exactly for augmented samples")

    @property
    def is_augmented(self) -> bool:
        return self.origin is Origin.AUGMENTED

    @property
    def parent_domains(self) -> Tuple[str, ...]:
        return self.provenance.parent_domains if self.provenance else (self.domain_id,)


@dataclass(frozen=True)
class SampleFlags:
    """Hidden ground truth; read by evaluation code only."""
    noisy: bool = False
    duplicate: bool = False
    true_label: Optional[int] = None


def stack_features(samples: Sequence[Sample]) -> np.ndarray:
    """Flattened features as an (n, C*H*W) matrix."""
    if not samples:
        raise ContractError("cannot stack an empty sample collection")
    return np.stack([s.features.reshape(-1) for s in samples])


def labels_of(samples: Sequence[Sample]) -> np.ndarray:
    return np.array([s.label for s in samples], dtype=np.int64)
