"""Amplitude-spectrum mixing: new styles, same semantics.

An augmented sample keeps the phase (and label) of its first parent and
takes a linear interpolation of both parents' amplitudes. Every augmented
sample is regarded as coming from its own new domain.
"""
import itertools
import logging
from typing import List, Mapping, Sequence, Tuple

import numpy as np

from ..data.sample import Origin, Provenance, Sample
from ..utils.errors import ContractError
from .fourier import SpectrumPair, dft2, idft2

logger = logging.getLogger(__name__)


class IdAllocator:
    """Hands out fresh (sample id, domain id) pairs for augmented samples."""

    def __init__(self, prefix: str = "aug"):
        self.prefix = prefix
        self._counter = itertools.count()

    def allocate(self) -> Tuple[str, str]:
        n = next(self._counter)
        return f"{self.prefix}-{n:06d}", f"{self.prefix}{n}"


def _check_pair(arr_i: np.ndarray, arr_j: np.ndarray, lam: float) -> None:
    if arr_i.shape != arr_j.shape:
        raise ContractError(f"cannot mix images of shapes {arr_i.shape} and {arr_j.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ContractError(f"mix coefficient {lam} outside [0, 1]")


def mix_spectrum(arr_i: np.ndarray, arr_j: np.ndarray, lam: float) -> SpectrumPair:
    """Spectrum with amplitude (1-λ)A_i + λA_j and the phase of arr_i."""
    _check_pair(arr_i, arr_j, lam)
    spec_i = dft2(arr_i)
    spec_j = dft2(arr_j)
    return SpectrumPair(amplitude=(1.0 - lam) * spec_i.amplitude + lam * spec_j.amplitude,
                        phase=spec_i.phase)


def mix_amplitude(arr_i: np.ndarray, arr_j: np.ndarray, lam: float, clip: bool = True) -> np.ndarray:
    """Image from the mixed spectrum, optionally clipped to [0, 1]."""
    mixed = idft2(mix_spectrum(arr_i, arr_j, lam))
    return np.clip(mixed, 0.0, 1.0) if clip else mixed


def amplitude_mix(x_i: Sample, x_j: Sample, lam: float, allocator: IdAllocator) -> Sample:
    """Augmented sample: phase and label of x_i, amplitude mixed toward x_j.

    Args:
        x_i: Phase parent
        x_j: Amplitude parent
        lam: Mix coefficient in [0, 1]
        allocator: Source of fresh ids

    Returns:
        Augmented Sample in a new domain
    """
    features = mix_amplitude(x_i.features, x_j.features, lam)
    sample_id, domain_id = allocator.allocate()
    return Sample(id=sample_id, features=features, label=x_i.label, domain_id=domain_id,
                  origin=Origin.AUGMENTED,
                  provenance=Provenance(parent_ids=(x_i.id, x_j.id),
                                        parent_domains=(x_i.domain_id, x_j.domain_id),
                                        lam=float(lam)))


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ContractError(f"eta {eta} outside [0, 1]")


def augment_batch(batch: Sequence[Sample], rng: np.random.Generator, eta: float,
                  allocator: IdAllocator) -> List[Sample]:
    """One augmented sample per batch sample.

    The batch is paired at random; each pair (i, j) with one λ ~ U(0, η)
    yields mix(i, j) and mix(j, i). With an odd batch the leftover sample is
    mixed once with a random partner.
    """
    if len(batch) < 2:
        raise ContractError(f"augmentation needs at least 2 samples, got {len(batch)}")
    _check_eta(eta)
    order = rng.permutation(len(batch))
    augmented = []
    for a, b in zip(order[0:-1:2], order[1::2]):
        lam = rng.uniform(0.0, eta)
        augmented.append(amplitude_mix(batch[a], batch[b], lam, allocator))
        augmented.append(amplitude_mix(batch[b], batch[a], lam, allocator))
    if len(batch) % 2:
        leftover = int(order[-1])
        partner = int(rng.choice([i for i in range(len(batch)) if i != leftover]))
        augmented.append(amplitude_mix(batch[leftover], batch[partner], rng.uniform(0.0, eta), allocator))
    return augmented


def build_augmented_pool(sources: Mapping[str, Sequence[Sample]], count: int,
                         rng: np.random.Generator, eta: float,
                         allocator: IdAllocator) -> List[Sample]:
    """A fixed pool of ``count`` augmented samples (one domain each).

    Parents are drawn uniformly from all source originals; used when the
    number of augmented domains is the controlled variable.
    """
    if count < 0:
        raise ContractError(f"augmented pool size must be >= 0, got {count}")
    _check_eta(eta)
    originals = [s for samples in sources.values() for s in samples]
    if count and len(originals) < 2:
        raise ContractError("need at least 2 source samples to build an augmented pool")
    pool = []
    for _ in range(count):
        i, j = rng.choice(len(originals), size=2, replace=False)
        pool.append(amplitude_mix(originals[i], originals[j], rng.uniform(0.0, eta), allocator))
    logger.debug(f"Built augmented pool of {len(pool)} domains")
    return pool
