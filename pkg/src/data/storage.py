"""Dataset directory format.

    manifest.json        DatasetManifest fields
    domain_<id>.f64      little-endian float64, samples x C x H x W, row-major
    labels_<id>.json     ids, labels and the hidden flags
"""
import json
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Union

import numpy as np

from ..utils.errors import ContractError
from .sample import Origin, Sample, SampleFlags
from .synth import Dataset, DatasetManifest

logger = logging.getLogger(__name__)


def save_dataset(dataset: Dataset, out_dir: Union[str, Path]) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(dataset.manifest.to_dict(), f, indent=2, sort_keys=True)
    for domain, samples in dataset.domains.items():
        blob = np.stack([s.features for s in samples]).astype("<f8")
        (out_dir / f"domain_{domain}.f64").write_bytes(blob.tobytes(order="C"))
        flags = [dataset.ground_truth.get(s.id, SampleFlags()) for s in samples]
        labels = {
            "ids": [s.id for s in samples],
            "labels": [s.label for s in samples],
            "noisy": [f.noisy for f in flags],
            "duplicate": [f.duplicate for f in flags],
            "true_labels": [s.label if f.true_label is None else f.true_label
                            for s, f in zip(samples, flags)],
        }
        with open(out_dir / f"labels_{domain}.json", "w", encoding="utf-8") as f:
            json.dump(labels, f, indent=2, sort_keys=True)
    logger.info(f"Wrote dataset ({len(dataset)} samples) to {out_dir}")
    return out_dir


def load_dataset(data_dir: Union[str, Path]) -> Dataset:
    """Read a dataset directory written by save_dataset."""
    data_dir = Path(data_dir)
    manifest_path = data_dir / "manifest.json"
    if not manifest_path.exists():
        raise ContractError(f"{data_dir} has no manifest.json")
    manifest = DatasetManifest.from_dict(json.loads(manifest_path.read_text(encoding="utf-8")))
    manifest.validate()
    shape = tuple(manifest.image_shape)
    domains = OrderedDict()
    ground_truth = {}
    for spec in manifest.domains:
        labels = json.loads((data_dir / f"labels_{spec.domain_id}.json").read_text(encoding="utf-8"))
        blob = np.frombuffer((data_dir / f"domain_{spec.domain_id}.f64").read_bytes(), dtype="<f8")
        count = len(labels["ids"])
        if blob.size != count * int(np.prod(shape)):
            raise ContractError(f"domain_{spec.domain_id}.f64 holds {blob.size} values, expected {count} x {shape}")
        features = blob.astype(np.float64).reshape((count,) + shape)
        samples = []
        for index, sample_id in enumerate(labels["ids"]):
            samples.append(Sample(id=sample_id, features=features[index].copy(),
                                  label=int(labels["labels"][index]), domain_id=spec.domain_id,
                                  origin=Origin.ORIGINAL))
            ground_truth[sample_id] = SampleFlags(noisy=bool(labels["noisy"][index]),
                                                  duplicate=bool(labels["duplicate"][index]),
                                                  true_label=int(labels["true_labels"][index]))
        domains[spec.domain_id] = samples
    logger.info(f"Loaded {sum(len(s) for s in domains.values())} samples from {data_dir}")
    return Dataset(manifest=manifest, domains=domains, ground_truth=ground_truth)
