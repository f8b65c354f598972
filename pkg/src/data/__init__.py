"""Synthetic multi-domain datasets."""
from .sample import Origin, Provenance, Sample, SampleFlags, labels_of, stack_features
from .synth import Dataset, DatasetManifest, DomainSpec, class_masks, default_manifest, generate
from .splits import leave_one_out
from .storage import load_dataset, save_dataset

__all__ = [
    'Origin',
    'Provenance',
    'Sample',
    'SampleFlags',
    'labels_of',
    'stack_features',
    'Dataset',
    'DatasetManifest',
    'DomainSpec',
    'class_masks',
    'default_manifest',
    'generate',
    'leave_one_out',
    'load_dataset',
    'save_dataset',
]
