"""Command-line entry point: dcg-lab <subcommand> ..."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .data import Dataset, DatasetManifest, generate, load_dataset, save_dataset
from .filter import ScoreBoard, dump_filtered
from .harness import (ParallelRunner, TrainConfig, Variant, ablate, discussion_variants, diversity_sweep,
                      noise_filter_study, sensitivity, train)
from .oracles import run_verification
from .utils.errors import ConfigError, ContractError, NotDefiniteError, NumericError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _config(args) -> TrainConfig:
    config = TrainConfig.from_json(args.config) if args.config else TrainConfig()
    if getattr(args, "seeds", None):
        config.seeds = tuple(args.seeds)
    config.validate()
    return config


def _runner(args) -> ParallelRunner:
    return ParallelRunner(max_workers=args.workers)


def _held_out(args, dataset: Dataset) -> str:
    held_out = args.holdout or dataset.domain_ids[0]
    if held_out not in dataset.domains:
        raise ConfigError(f"unknown held-out domain {held_out!r}; dataset has {dataset.domain_ids}")
    return held_out


def cmd_generate_data(args) -> int:
    try:
        data = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{args.manifest}: cannot read manifest ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.manifest}: not valid JSON ({exc})") from None
    dataset = generate(DatasetManifest.from_dict(data))
    save_dataset(dataset, args.out_dir)
    print(f"{len(dataset)} samples in {len(dataset.domains)} domains written to {args.out_dir}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    result = train(config, dataset, _held_out(args, dataset), args.seed, out_dir=args.out)
    print(f"held-out accuracy {result.final_accuracy:.4f} (results in {args.out})")
    return EXIT_OK


def cmd_ablate(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    means, stds = ablate(config, dataset, held_outs=args.holdouts, runner=_runner(args), out_dir=args.out)
    print(means.to_string(float_format=lambda v: f"{v:.4f}"))
    return EXIT_OK


def cmd_discussion(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    means, stds = discussion_variants(config, dataset, held_outs=args.holdouts, runner=_runner(args),
                                      out_dir=args.out)
    print(means.to_string(float_format=lambda v: f"{v:.4f}"))
    return EXIT_OK


def cmd_sweep_diversity(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    try:
        variants = [Variant(v) for v in args.variants]
    except ValueError:
        raise ConfigError(f"unknown variant in {args.variants}; choose from {[v.value for v in Variant]}") from None
    curves, statistics = diversity_sweep(config, dataset, _held_out(args, dataset), args.n_values,
                                         variants=variants, runner=_runner(args), out_dir=args.out)
    print(statistics.groupby("variant")[["spearman", "decreasing_steps"]].median().to_string())
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    grid = sensitivity(config, dataset, _held_out(args, dataset), args.omegas, args.ks,
                       runner=_runner(args), out_dir=args.out)
    print(grid.to_string(index=False))
    return EXIT_OK


def cmd_noise_filter(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    table, median = noise_filter_study(config, dataset, _held_out(args, dataset), runner=_runner(args),
                                       out_dir=args.out)
    print(table.to_string(index=False))
    print(f"median noisy/clean ratio: {median:.3f}")
    return EXIT_OK


def cmd_verify_oracles(args) -> int:
    table = run_verification(seed=args.seed, clamp_trials=args.clamp_trials, out_dir=args.out)
    print(table.to_string(index=False))
    return EXIT_OK if bool(table["passed"].all()) else EXIT_FAILED_CHECKS


def cmd_dump_filtered(args) -> int:
    dataset = load_dataset(args.data)
    board = ScoreBoard.load(Path(args.run) / "scoreboard.json")
    originals = {s.id: s for samples in dataset.domains.values() for s in samples}
    index = dump_filtered(board, originals, args.out, count=args.count)
    print(f"{len(index)} images written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcg-lab",
                                     description="Domain convex game: training, experiments and oracles")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-data", help="Render a synthetic multi-domain dataset")
    p.add_argument("manifest", help="Dataset manifest JSON")
    p.add_argument("out_dir", help="Output directory")
    p.set_defaults(func=cmd_generate_data)

    def experiment(name: str, func, help_text: str, holdout: bool = True, holdouts: bool = False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, default=None, help="TrainConfig JSON (defaults if omitted)")
        p.add_argument("--data", type=str, required=True, help="Dataset directory")
        p.add_argument("--out", type=str, required=True, help="Output directory")
        p.add_argument("--seeds", type=int, nargs="+", default=None, help="Override config seeds")
        p.add_argument("--workers", type=int, default=1, help="Worker processes (1 runs inline)")
        if holdout:
            p.add_argument("--holdout", type=str, default=None, help="Held-out domain (default: first)")
        if holdouts:
            p.add_argument("--holdouts", type=str, nargs="+", default=None,
                           help="Held-out domains (default: all)")
        p.set_defaults(func=func)
        return p

    p = sub.add_parser("train", help="One training run")
    p.add_argument("--config", type=str, default=None, help="TrainConfig JSON (defaults if omitted)")
    p.add_argument("--data", type=str, required=True, help="Dataset directory")
    p.add_argument("--holdout", type=str, default=None, help="Held-out domain (default: first)")
    p.add_argument("--seed", type=int, default=0, help="Run seed")
    p.add_argument("--out", type=str, required=True, help="Output directory")
    p.set_defaults(func=cmd_train)

    experiment("ablate", cmd_ablate, "Ablation table over variants", holdout=False, holdouts=True)
    experiment("discussion", cmd_discussion, "Random meta split and restricted filters",
               holdout=False, holdouts=True)
    p = experiment("sweep-diversity", cmd_sweep_diversity, "Accuracy against augmented-domain count")
    p.add_argument("--n-values", type=int, nargs="+", default=[0, 4, 8, 16, 32, 64],
                   help="Ascending augmented-domain counts")
    p.add_argument("--variants", type=str, nargs="+",
                   default=[Variant.AUG_ONLY.value, Variant.FULL_DCG.value], help="Variants to sweep")
    p = experiment("sensitivity", cmd_sensitivity, "Accuracy over an (omega, k) grid")
    p.add_argument("--omegas", type=float, nargs="+", default=[0.0, 0.05, 0.1, 0.2, 0.3, 0.5])
    p.add_argument("--ks", type=int, nargs="+", default=[0, 1, 3, 5, 7, 9])
    experiment("noise-filter", cmd_noise_filter, "Discard frequency of noisy against clean samples")

    p = sub.add_parser("verify-oracles", help="Exact checks of gradients, regularizer and transforms")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clamp-trials", type=int, default=1000)
    p.add_argument("--out", type=str, default=None, help="Directory for verification.csv/json")
    p.set_defaults(func=cmd_verify_oracles)

    p = sub.add_parser("dump-filtered", help="Images of the most and least discarded samples of a run")
    p.add_argument("--run", type=str, required=True, help="Run directory containing scoreboard.json")
    p.add_argument("--data", type=str, required=True, help="Dataset directory")
    p.add_argument("--out", type=str, required=True, help="Output directory")
    p.add_argument("--count", type=int, default=8, help="Images per group")
    p.set_defaults(func=cmd_dump_filtered)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, NotDefiniteError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
