"""Experiment suite: ablation, diversity sweep, sensitivity, discussion and noise studies."""
import functools
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..data import Dataset
from ..utils.errors import ConfigError
from .config import ABLATION_VARIANTS, DISCUSSION_VARIANTS, TrainConfig, Variant
from .metrics import RunStatistics
from .parallel import ParallelRunner, RunJob
from .plotting import SweepPlotter
from .trainer import train

logger = logging.getLogger(__name__)

REFERENCE_OMEGA = (0.05, 0.3)
REFERENCE_K = (3, 7)
OutDir = Optional[Union[str, Path]]


def accuracy_job(job: RunJob, dataset: Dataset) -> Dict:
    """Train one job and report its held-out accuracy."""
    result = train(job.config, dataset, job.held_out, job.seed)
    return {"variant": job.config.variant.value, "held_out": job.held_out, "seed": job.seed,
            "final_accuracy": result.final_accuracy}


def noise_job(job: RunJob, dataset: Dataset) -> Dict:
    """Train one job and compare discard frequencies of noisy and clean originals.

    Reads the hidden ground-truth flags, which the trainer never sees.
    """
    result = train(job.config, dataset, job.held_out, job.seed)
    board = result.board
    noisy, clean = [], []
    for sample_id in board.participation:
        flags = dataset.ground_truth.get(sample_id)
        if flags is None:
            continue
        (noisy if flags.noisy else clean).append(board.top_frequency(sample_id))
    noisy_mean = float(np.mean(noisy)) if noisy else 0.0
    clean_mean = float(np.mean(clean)) if clean else 0.0
    return {"variant": job.config.variant.value, "held_out": job.held_out, "seed": job.seed,
            "final_accuracy": result.final_accuracy, "noisy_scored": len(noisy), "clean_scored": len(clean),
            "noisy_frequency": noisy_mean, "clean_frequency": clean_mean,
            "ratio": noisy_mean / max(clean_mean, 1e-12)}


def _run(jobs: List[RunJob], dataset: Dataset, runner: Optional[ParallelRunner],
         job_fn=accuracy_job) -> pd.DataFrame:
    runner = runner or ParallelRunner(max_workers=1)
    runner.run_parallel(jobs, functools.partial(job_fn, dataset=dataset))
    return runner.results_to_dataframe()


def _write(table: pd.DataFrame, out_dir: OutDir, name: str, index: bool = False) -> None:
    if out_dir is None:
        return
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_dir / name, index=index, float_format="%.10g")
    logger.info(f"Wrote {out_dir / name}")


def variant_table(runs: pd.DataFrame, variants: Sequence[Variant],
                  held_outs: Sequence[str]) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Mean and population-std tables, variant x (held-out domains + avg).

    The avg column is the mean of the per-domain means; its std is taken
    over seeds of the per-seed domain averages.
    """
    names = [v.value for v in variants]
    columns = list(held_outs) + ["avg"]
    means = pd.DataFrame(0.0, index=names, columns=columns)
    stds = pd.DataFrame(0.0, index=names, columns=columns)
    for name in names:
        rows = runs[runs["variant"] == name] if len(runs) else runs
        for domain in held_outs:
            summary = RunStatistics.seed_summary(rows[rows["held_out"] == domain]["final_accuracy"])
            means.loc[name, domain] = summary["mean"]
            stds.loc[name, domain] = summary["std"]
        means.loc[name, "avg"] = float(means.loc[name, list(held_outs)].mean())
        per_seed = rows.groupby("seed")["final_accuracy"].mean() if len(rows) else []
        stds.loc[name, "avg"] = RunStatistics.seed_summary(per_seed)["std"]
    means.index.name = stds.index.name = "variant"
    return means, stds


def _jobs(config: TrainConfig, variants: Sequence[Variant], held_outs: Sequence[str],
          **overrides) -> List[RunJob]:
    jobs = []
    for variant in variants:
        variant_config = config.for_variant(variant, **overrides)
        variant_config.validate()
        for held_out in held_outs:
            for seed in config.seeds:
                jobs.append(RunJob(key=(variant.value, held_out, seed), config=variant_config,
                                   held_out=held_out, seed=seed))
    return jobs


def ablate(config: TrainConfig, dataset: Dataset, variants: Sequence[Variant] = ABLATION_VARIANTS,
           held_outs: Optional[Sequence[str]] = None, runner: Optional[ParallelRunner] = None,
           out_dir: OutDir = None) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Every variant x seed x held-out domain.

    Returns:
        (mean accuracy table, population std table)
    """
    held_outs = list(held_outs or dataset.domain_ids)
    runs = _run(_jobs(config, variants, held_outs), dataset, runner)
    means, stds = variant_table(runs, variants, held_outs)
    _write(runs, out_dir, "ablation_runs.csv")
    _write(means, out_dir, "ablation_mean.csv", index=True)
    _write(stds, out_dir, "ablation_std.csv", index=True)
    return means, stds


def discussion_variants(config: TrainConfig, dataset: Dataset, held_outs: Optional[Sequence[str]] = None,
                        runner: Optional[ParallelRunner] = None,
                        out_dir: OutDir = None) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Full method against random meta split and the two restricted filters."""
    held_outs = list(held_outs or dataset.domain_ids)
    runs = _run(_jobs(config, DISCUSSION_VARIANTS, held_outs), dataset, runner)
    means, stds = variant_table(runs, DISCUSSION_VARIANTS, held_outs)
    _write(runs, out_dir, "discussion_runs.csv")
    _write(means, out_dir, "discussion_mean.csv", index=True)
    _write(stds, out_dir, "discussion_std.csv", index=True)
    return means, stds


def diversity_sweep(config: TrainConfig, dataset: Dataset, held_out: str, n_values: Sequence[int],
                    variants: Sequence[Variant] = (Variant.AUG_ONLY, Variant.FULL_DCG),
                    runner: Optional[ParallelRunner] = None,
                    out_dir: OutDir = None) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Accuracy as a function of the number of augmented domains.

    Each run draws its augmented samples from a fixed pool of N domains;
    pools for smaller N are prefixes of pools for larger N. At N = 0 the
    aug-only curve equals training without augmentation, while full-DCG
    still plays the game and filters on the originals, so its N = 0 point
    is the game without augmentation rather than the baseline.

    Returns:
        (curves with one row per variant/N/seed, per-variant/seed curve statistics)
    """
    n_values = [int(n) for n in n_values]
    if not n_values or n_values != sorted(n_values) or n_values[0] < 0:
        raise ConfigError(f"N values must be non-negative and ascending, got {n_values}")
    jobs = []
    for variant in variants:
        for n in n_values:
            variant_config = config.for_variant(variant, augmented_cap=n)
            variant_config.validate()
            for seed in config.seeds:
                jobs.append(RunJob(key=(variant.value, n, seed), config=variant_config,
                                   held_out=held_out, seed=seed))
    runs = _successful(_run(jobs, dataset, runner), jobs)
    curves = pd.DataFrame({
        "variant": [job.config.variant.value for job in jobs],
        "N": [job.config.augmented_cap for job in jobs],
        "seed": [job.seed for job in jobs],
        "accuracy": [run["final_accuracy"] for run in runs],
    }, columns=["variant", "N", "seed", "accuracy"])
    statistics = curve_statistics(curves)
    _write(curves, out_dir, "sweep.csv")
    _write(statistics, out_dir, "sweep_stats.csv")
    if out_dir is not None and len(curves):
        SweepPlotter().save_svg(curves, Path(out_dir) / "curve.svg")
    return curves, statistics


def curve_statistics(curves: pd.DataFrame) -> pd.DataFrame:
    """Spearman ρ(N, accuracy) and strictly decreasing steps per variant and seed."""
    rows = []
    if len(curves):
        for (variant, seed), group in curves.groupby(["variant", "seed"], sort=True):
            group = group.sort_values("N")
            rows.append({"variant": variant, "seed": seed,
                         "spearman": RunStatistics.spearman(group["N"], group["accuracy"]),
                         "decreasing_steps": RunStatistics.decreasing_steps(group["accuracy"])})
    return pd.DataFrame(rows, columns=["variant", "seed", "spearman", "decreasing_steps"])


def sensitivity(config: TrainConfig, dataset: Dataset, held_out: str, omegas: Sequence[float],
                ks: Sequence[int], variant: Variant = Variant.FULL_DCG,
                runner: Optional[ParallelRunner] = None, out_dir: OutDir = None,
                tolerance: float = 0.02) -> pd.DataFrame:
    """Accuracy over an (ω, k) grid.

    Returns:
        One row per grid point with mean/std accuracy, whether the point lies
        in the reference region (0.05 <= ω <= 0.3, 3 <= k <= 7) and whether
        its mean accuracy is within ``tolerance`` of the best point
    """
    if not omegas or not ks:
        raise ConfigError("sensitivity grids must be non-empty")
    jobs = []
    for omega in omegas:
        for k in ks:
            point = config.for_variant(variant, omega=float(omega), k=int(k))
            point.validate()
            for seed in config.seeds:
                jobs.append(RunJob(key=(float(omega), int(k), seed), config=point, held_out=held_out, seed=seed))
    runs = _successful(_run(jobs, dataset, runner), jobs)
    rows = []
    for omega in omegas:
        for k in ks:
            accuracies = [run["final_accuracy"] for job, run in zip(jobs, runs)
                          if job.key[:2] == (float(omega), int(k))]
            summary = RunStatistics.seed_summary(accuracies)
            rows.append({"omega": float(omega), "k": int(k), "accuracy_mean": summary["mean"],
                         "accuracy_std": summary["std"], "runs": summary["runs"],
                         "reference_region": bool(REFERENCE_OMEGA[0] <= omega <= REFERENCE_OMEGA[1]
                                                  and REFERENCE_K[0] <= k <= REFERENCE_K[1])})
    grid = pd.DataFrame(rows)
    grid["near_best"] = grid["accuracy_mean"] >= grid["accuracy_mean"].max() - tolerance
    _write(grid, out_dir, "sensitivity.csv")
    return grid


def _successful(runs: pd.DataFrame, jobs: List[RunJob]) -> List[Dict]:
    if len(runs) != len(jobs):
        raise ConfigError(f"{len(jobs) - len(runs)} runs failed; see log")
    return runs.to_dict(orient="records")


def noise_filter_study(config: TrainConfig, dataset: Dataset, held_out: str,
                       runner: Optional[ParallelRunner] = None,
                       out_dir: OutDir = None) -> Tuple[pd.DataFrame, float]:
    """How much more often noisy originals are discarded than clean ones.

    Returns:
        (per-seed table, median noisy/clean frequency ratio over seeds)
    """
    if not any(flags.noisy for flags in dataset.ground_truth.values()):
        raise ConfigError("dataset has no label noise; generate it with label_noise > 0")
    if config.variant.filter_source is None or config.k == 0:
        raise ConfigError(f"variant {config.variant.value} with k={config.k} never filters")
    config.validate()
    jobs = [RunJob(key=(config.variant.value, held_out, seed), config=config, held_out=held_out, seed=seed)
            for seed in config.seeds]
    table = _run(jobs, dataset, runner, job_fn=noise_job)
    median = float(np.median(table["ratio"])) if len(table) else 0.0
    _write(table, out_dir, "noise_filter.csv")
    logger.info(f"Noisy/clean discard frequency ratio (median over {len(table)} seeds): {median:.3f}")
    return table, median
