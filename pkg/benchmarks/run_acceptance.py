#!/usr/bin/env python3
"""Statistical acceptance runs: noise filter, directional ablation and diversity sweep."""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import argparse
import json
import logging
import time

from src.data import default_manifest, generate
from src.harness import ParallelRunner, TrainConfig, Variant, ablate, diversity_sweep, noise_filter_study


def check_noise_filter(config: TrainConfig, out_dir: str, samples: int, workers: int) -> dict:
    """Noisy originals should be discarded at least twice as often as clean ones."""
    dataset = generate(default_manifest(samples_per_domain=samples, label_noise=0.10, seed=0))
    _, median = noise_filter_study(config.for_variant(Variant.FULL_DCG), dataset, "D0",
                                   runner=ParallelRunner(workers), out_dir=os.path.join(out_dir, "noise"))
    return {"median_ratio": median, "passed": median >= 2.0}


def check_ablation(config: TrainConfig, out_dir: str, samples: int, workers: int) -> dict:
    """full-DCG beats aug-only by a point; the supermodularity term beats the MAML term."""
    dataset = generate(default_manifest(samples_per_domain=samples, seed=0))
    means, _ = ablate(config, dataset, runner=ParallelRunner(workers), out_dir=os.path.join(out_dir, "ablation"))
    avg = means["avg"]
    gain = float(avg["full-DCG"] - avg["aug-only"])
    return {"full_minus_aug_only": gain, "lsm_minus_lmaml": float(avg["aug+Lsm"] - avg["aug+Lmaml"]),
            "passed": gain >= 0.01 and avg["aug+Lsm"] >= avg["aug+Lmaml"]}


def check_diversity(config: TrainConfig, out_dir: str, samples: int, workers: int) -> dict:
    """DCG's accuracy should track the augmented-domain count at least as well as aug-only."""
    dataset = generate(default_manifest(samples_per_domain=samples, seed=0))
    _, stats = diversity_sweep(config, dataset, "D0", [0, 4, 8, 16, 32, 64], runner=ParallelRunner(workers),
                               out_dir=os.path.join(out_dir, "sweep"))
    medians = stats.groupby("variant")[["spearman", "decreasing_steps"]].median()
    dcg, base = medians.loc["full-DCG"], medians.loc["aug-only"]
    return {"spearman": {"full-DCG": float(dcg["spearman"]), "aug-only": float(base["spearman"])},
            "decreasing_steps": {"full-DCG": float(dcg["decreasing_steps"]),
                                 "aug-only": float(base["decreasing_steps"])},
            "passed": bool(dcg["spearman"] >= base["spearman"]
                           and dcg["decreasing_steps"] <= base["decreasing_steps"])}


def run_benchmark(epochs: int = 50, samples: int = 200, workers: int = None,
                  out_dir: str = "benchmarks/reports") -> dict:
    """Run the three checks and save a summary report."""
    config = TrainConfig(epochs=epochs)
    checks = {"noise-filter": check_noise_filter, "ablation": check_ablation, "diversity": check_diversity}
    report = {"epochs": epochs, "samples_per_domain": samples}

    print("\n" + "=" * 80)
    print("ACCEPTANCE RUNS")
    print("=" * 80)
    for name, check in checks.items():
        print(f"\nRunning {name}...")
        start = time.perf_counter()
        result = check(config, out_dir, samples, workers)
        result["seconds"] = round(time.perf_counter() - start, 1)
        report[name] = result
        print(f"  {'PASS' if result['passed'] else 'FAIL'} in {result['seconds']:.1f}s: "
              f"{ {k: v for k, v in result.items() if k not in ('passed', 'seconds')} }")

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "acceptance.json"), "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True, default=float)
    print("=" * 80 + "\n")
    return report


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description='Long statistical acceptance runs')
    parser.add_argument('--epochs', type=int, default=50, help='Epochs per training run')
    parser.add_argument('--samples', type=int, default=200, help='Samples per domain')
    parser.add_argument('--workers', type=int, default=None, help='Worker processes (default: all cores)')
    parser.add_argument('--out', type=str, default='benchmarks/reports', help='Report directory')
    args = parser.parse_args()
    logging.basicConfig(level=logging.WARNING, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    report = run_benchmark(args.epochs, args.samples, args.workers, args.out)
    sys.exit(0 if all(r["passed"] for r in report.values() if isinstance(r, dict)) else 1)
