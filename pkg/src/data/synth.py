"""Seeded multi-domain glyph datasets.

Class identity is a binary glyph shared by every domain, drawn as a
zero-mean brightness offset so it is lighter than its surround in every
channel of every domain. Domain identity is a colored stripe background.
Style therefore lives mostly in the amplitude spectrum and the class in the
spatial structure.
"""
import logging
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..utils.errors import ConfigError, ContractError
from .sample import Origin, Sample, SampleFlags

logger = logging.getLogger(__name__)

GLYPH_GRID = 4
GLYPH_CONTRAST = 0.3
BACKGROUND_FLOOR = 0.25
BACKGROUND_SPAN = 0.4
BRIGHTNESS_JITTER = 0.03


@dataclass(frozen=True)
class DomainSpec:
    """Style of one domain.

    Ranges: hue components in [0, 1]; stripe_frequency in [0, 8] cycles per
    image; stripe_orientation in [0, π); noise_level in [0, 0.2].
    """
    domain_id: str
    hue: Tuple[float, float, float]
    stripe_frequency: float
    stripe_orientation: float
    noise_level: float = 0.02

    def validate(self) -> None:
        if len(self.hue) != 3 or any(not 0.0 <= h <= 1.0 for h in self.hue):
            raise ContractError(f"domain {self.domain_id}: hue {self.hue} outside [0, 1]^3")
        if not 0.0 <= self.stripe_frequency <= 8.0:
            raise ContractError(f"domain {self.domain_id}: stripe_frequency {self.stripe_frequency} outside [0, 8]")
        if not 0.0 <= self.stripe_orientation < np.pi:
            raise ContractError(f"domain {self.domain_id}: stripe_orientation {self.stripe_orientation} outside [0, pi)")
        if not 0.0 <= self.noise_level <= 0.2:
            raise ContractError(f"domain {self.domain_id}: noise_level {self.noise_level} outside [0, 0.2]")

    def style_key(self) -> Tuple:
        return (tuple(self.hue), self.stripe_frequency, self.stripe_orientation, self.noise_level)


@dataclass
class DatasetManifest:
    """Everything needed to regenerate a dataset bit for bit."""
    num_classes: int
    image_shape: Tuple[int, int, int]
    domains: List[DomainSpec]
    samples_per_domain: int
    label_noise: float = 0.0
    duplicate_fraction: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.num_classes < 2:
            raise ContractError(f"num_classes must be >= 2, got {self.num_classes}")
        if len(self.image_shape) != 3 or any(s < 1 for s in self.image_shape):
            raise ContractError(f"image_shape must be three positive extents, got {self.image_shape}")
        if self.image_shape[0] != 3:
            raise ContractError(f"styling needs 3 channels, got {self.image_shape[0]}")
        if self.samples_per_domain < 1:
            raise ContractError(f"samples_per_domain must be positive, got {self.samples_per_domain}")
        for name, value in (("label_noise", self.label_noise), ("duplicate_fraction", self.duplicate_fraction)):
            if not 0.0 <= value <= 0.5:
                raise ContractError(f"{name} {value} outside [0, 0.5]")
        if not self.domains:
            raise ContractError("manifest has no domains")
        ids = [d.domain_id for d in self.domains]
        if len(set(ids)) != len(ids):
            raise ContractError(f"duplicate domain ids in {ids}")
        styles = [d.style_key() for d in self.domains]
        if len(set(styles)) != len(styles):
            raise ContractError("two domains share identical style parameters")
        for spec in self.domains:
            spec.validate()
        if 2 ** (GLYPH_GRID * GLYPH_GRID) - 2 < self.num_classes:
            raise ContractError(f"cannot draw {self.num_classes} distinct glyphs")

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["image_shape"] = list(self.image_shape)
        data["domains"] = [dict(asdict(d), hue=list(d.hue)) for d in self.domains]
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "DatasetManifest":
        try:
            domains = [DomainSpec(domain_id=d["domain_id"], hue=tuple(d["hue"]),
                                  stripe_frequency=float(d["stripe_frequency"]),
                                  stripe_orientation=float(d["stripe_orientation"]),
                                  noise_level=float(d.get("noise_level", 0.02)))
                       for d in data["domains"]]
            return cls(num_classes=int(data["num_classes"]), image_shape=tuple(data["image_shape"]),
                       domains=domains, samples_per_domain=int(data["samples_per_domain"]),
                       label_noise=float(data.get("label_noise", 0.0)),
                       duplicate_fraction=float(data.get("duplicate_fraction", 0.0)),
                       seed=int(data.get("seed", 0)))
        except KeyError as e:
            raise ConfigError(f"manifest is missing key {e}") from e
        except (TypeError, ValueError, AttributeError) as e:
            raise ConfigError(f"malformed manifest: {e}") from e


@dataclass
class Dataset:
    """Generated samples per domain plus the hidden ground-truth flags."""
    manifest: DatasetManifest
    domains: "OrderedDict[str, List[Sample]]"
    ground_truth: Dict[str, SampleFlags] = field(default_factory=dict)

    @property
    def domain_ids(self) -> List[str]:
        return list(self.domains.keys())

    def __len__(self) -> int:
        return sum(len(samples) for samples in self.domains.values())


def default_manifest(samples_per_domain: int = 200, label_noise: float = 0.0,
                     duplicate_fraction: float = 0.0, seed: int = 0) -> DatasetManifest:
    """Four styled domains, seven classes, 3x16x16 images."""
    domains = [
        DomainSpec("D0", (0.90, 0.15, 0.15), 1.0, 0.0, 0.02),
        DomainSpec("D1", (0.15, 0.90, 0.15), 3.0, np.pi / 4, 0.02),
        DomainSpec("D2", (0.15, 0.15, 0.90), 5.0, np.pi / 2, 0.02),
        DomainSpec("D3", (0.90, 0.90, 0.15), 2.0, 3 * np.pi / 4, 0.03),
    ]
    return DatasetManifest(num_classes=7, image_shape=(3, 16, 16), domains=domains,
                           samples_per_domain=samples_per_domain, label_noise=label_noise,
                           duplicate_fraction=duplicate_fraction, seed=seed)


def class_masks(manifest: DatasetManifest) -> np.ndarray:
    """One binary glyph per class, shape (C, H, W); depends only on the seed."""
    rng = np.random.default_rng([manifest.seed, 0x61796C67])
    _, height, width = manifest.image_shape
    patterns = []
    seen = set()
    while len(patterns) < manifest.num_classes:
        grid = rng.integers(0, 2, size=(GLYPH_GRID, GLYPH_GRID))
        key = grid.tobytes()
        if key in seen or grid.sum() in (0, grid.size):
            continue
        seen.add(key)
        patterns.append(grid)
    rows = np.arange(height) * GLYPH_GRID // height
    cols = np.arange(width) * GLYPH_GRID // width
    return np.stack([p[rows][:, cols] for p in patterns]).astype(np.float64)


def _render(spec: DomainSpec, mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    height, width = mask.shape
    yy, xx = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    direction = xx * np.cos(spec.stripe_orientation) / width + yy * np.sin(spec.stripe_orientation) / height
    texture = 0.5 + 0.5 * np.sin(2 * np.pi * spec.stripe_frequency * direction + rng.uniform(0, 2 * np.pi))
    shade = 0.6 + 0.4 * texture
    hue = np.asarray(spec.hue).reshape(3, 1, 1)
    background = BACKGROUND_FLOOR + BACKGROUND_SPAN * hue * shade
    # zero-mean glyph: brighter than the background in every channel, no shift of the channel means
    glyph = GLYPH_CONTRAST * (mask - mask.mean())
    image = (background + glyph[None]) * rng.uniform(1.0 - BRIGHTNESS_JITTER, 1.0 + BRIGHTNESS_JITTER)
    image = image + rng.normal(0.0, spec.noise_level, size=image.shape)
    return np.clip(image, 0.0, 1.0)


def generate(manifest: DatasetManifest, rng: Optional[np.random.Generator] = None) -> Dataset:
    """Generate every domain of a manifest.

    Args:
        manifest: Dataset description
        rng: Generator; defaults to one seeded with manifest.seed

    Returns:
        Dataset with samples per domain and hidden flags
    """
    manifest.validate()
    rng = rng if rng is not None else np.random.default_rng(manifest.seed)
    masks = class_masks(manifest)
    count = manifest.samples_per_domain
    domains: "OrderedDict[str, List[Sample]]" = OrderedDict()
    ground_truth: Dict[str, SampleFlags] = {}

    for spec in manifest.domains:
        labels = rng.integers(0, manifest.num_classes, size=count)
        images = [_render(spec, masks[label], rng) for label in labels]
        true_labels = labels.copy()

        duplicates = int(round(manifest.duplicate_fraction * count))
        duplicate_slots = rng.choice(count, size=duplicates, replace=False) if duplicates else np.array([], int)
        duplicate_set = set(duplicate_slots.tolist())
        sources = [i for i in range(count) if i not in duplicate_set]
        for slot in duplicate_slots:
            source = int(rng.choice(sources))
            images[slot] = images[source].copy()
            labels[slot] = labels[source]
            true_labels[slot] = true_labels[source]

        noisy = int(round(manifest.label_noise * count))
        noisy_slots = rng.choice(count, size=noisy, replace=False) if noisy else np.array([], int)
        for slot in noisy_slots:
            shift = rng.integers(1, manifest.num_classes)
            labels[slot] = (labels[slot] + shift) % manifest.num_classes

        noisy_set = set(noisy_slots.tolist())
        samples = []
        for index in range(count):
            sample_id = f"{spec.domain_id}-{index:05d}"
            samples.append(Sample(id=sample_id, features=images[index], label=int(labels[index]),
                                  domain_id=spec.domain_id, origin=Origin.ORIGINAL))
            ground_truth[sample_id] = SampleFlags(noisy=index in noisy_set,
                                                  duplicate=index in duplicate_set,
                                                  true_label=int(true_labels[index]))
        domains[spec.domain_id] = samples
        logger.debug(f"Generated domain {spec.domain_id}: {count} samples, "
                     f"{len(noisy_set)} noisy, {len(duplicate_set)} duplicates")

    logger.info(f"Generated {count * len(manifest.domains)} samples in {len(domains)} domains")
    return Dataset(manifest=manifest, domains=domains, ground_truth=ground_truth)
