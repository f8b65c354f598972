"""Training runs and the experiments built from them."""
from .config import ABLATION_VARIANTS, DISCUSSION_VARIANTS, TrainConfig, Variant
from .metrics import METRICS_COLUMNS, EpochMetrics, MetricsRecord, RunStatistics
from .trainer import RunResult, Trainer, train
from .parallel import ParallelRunner, RunJob
from .plotting import MATPLOTLIB_AVAILABLE, SweepPlotter
from .experiments import (ablate, curve_statistics, discussion_variants, diversity_sweep,
                          noise_filter_study, sensitivity, variant_table)

__all__ = [
    'ABLATION_VARIANTS',
    'DISCUSSION_VARIANTS',
    'TrainConfig',
    'Variant',
    'METRICS_COLUMNS',
    'EpochMetrics',
    'MetricsRecord',
    'RunStatistics',
    'RunResult',
    'Trainer',
    'train',
    'ParallelRunner',
    'RunJob',
    'MATPLOTLIB_AVAILABLE',
    'SweepPlotter',
    'ablate',
    'curve_statistics',
    'discussion_variants',
    'diversity_sweep',
    'noise_filter_study',
    'sensitivity',
    'variant_table',
]
