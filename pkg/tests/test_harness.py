import pytest
import sys
import os
import json
import numpy as np
import pandas as pd
from collections import OrderedDict

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.augment import IdAllocator, augment_batch
from src.autodiff import Tensor
from src.data import default_manifest, generate
from src.game import CoalitionInputs, GameOutcome
from src.harness import (ABLATION_VARIANTS, DISCUSSION_VARIANTS, METRICS_COLUMNS, EpochMetrics, MetricsRecord,
                         ParallelRunner, RunJob, RunStatistics, TrainConfig, Trainer, Variant, ablate,
                         curve_statistics, discussion_variants, diversity_sweep, noise_filter_study, sensitivity,
                         train, variant_table)
from src.utils.errors import ConfigError, TargetLeakError


@pytest.fixture(scope="module")
def dataset():
    return generate(default_manifest(samples_per_domain=8, seed=0))


@pytest.fixture
def tiny_config():
    return TrainConfig(epochs=1, batch_size=8, lr=0.05, omega=0.1, k=2, seeds=(0,), hidden=(4,))


def _echo_job(job):
    if job.seed < 0:
        raise ValueError("negative seed")
    return {"seed": job.seed, "held_out": job.held_out, "nested": {"ignored": True}}


def test_config_defaults_validate():
    """Test that the default configuration is valid."""
    config = TrainConfig()
    config.validate()
    assert config.variant is Variant.FULL_DCG
    assert config.plays_game


@pytest.mark.parametrize("changes", [
    {"epochs": 0}, {"batch_size": 1}, {"lr": 0.0}, {"momentum": 1.0}, {"omega": -0.1},
    {"k": 16}, {"eta": 1.5}, {"V": 0}, {"seeds": ()}, {"coalition_sizes": (1, 0, 1)},
    {"activation": "gelu"}, {"augmented_cap": -1},
])
def test_config_rejects_out_of_range(changes):
    """Test that out-of-range settings are config errors."""
    with pytest.raises(ConfigError):
        TrainConfig(**changes).validate()


def test_config_rejects_unused_parts():
    """Test ω or k on a variant without the matching component."""
    with pytest.raises(ConfigError, match="no regularizer"):
        TrainConfig(variant=Variant.AUG_FSM, omega=0.1, k=2).validate()
    with pytest.raises(ConfigError, match="no filter"):
        TrainConfig(variant=Variant.AUG_LSM, omega=0.1, k=2).validate()
    with pytest.raises(ConfigError):
        TrainConfig(variant=Variant.BASELINE, omega=0.0, k=0, augmented_cap=4).validate()


def test_config_from_dict_and_json(tmp_path):
    """Test loading flat JSON, unknown keys and bad files."""
    config = TrainConfig.from_dict({"epochs": 3, "variant": "aug-only", "omega": 0.0, "k": 0, "seeds": [4, 5]})
    assert config.variant is Variant.AUG_ONLY
    assert config.seeds == (4, 5)
    assert TrainConfig.from_dict(config.to_dict()) == config
    with pytest.raises(ConfigError, match="unknown config keys"):
        TrainConfig.from_dict({"epochz": 3})
    with pytest.raises(ConfigError):
        TrainConfig.from_dict({"variant": "no-such-variant"})
    path = tmp_path / "config.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        TrainConfig.from_json(path)
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        TrainConfig.from_json(path)
    with pytest.raises(ConfigError, match="cannot read config"):
        TrainConfig.from_json(tmp_path / "absent.json")


def test_for_variant_zeroes_missing_parts():
    """Test that switching variant drops ω, k and the pool cap where they do not apply."""
    config = TrainConfig(omega=0.2, k=4, augmented_cap=8)
    baseline = config.for_variant(Variant.BASELINE)
    assert (baseline.omega, baseline.k, baseline.augmented_cap) == (0.0, 0, None)
    baseline.validate()
    lsm = config.for_variant("aug+Lsm")
    assert (lsm.omega, lsm.k, lsm.augmented_cap) == (0.2, 0, 8)
    assert config.for_variant(Variant.FULL_DCG, k=1).k == 1


def test_variant_components():
    """Test the component switches of each variant."""
    assert not Variant.BASELINE.augment
    assert Variant.AUG_ONLY.regularizer is None and Variant.AUG_ONLY.filter_source is None
    assert Variant.AUG_LMAML_FMAML.regularizer == "maml"
    assert Variant.AUG_LMAML_FMAML.filter_source == "maml"
    assert Variant.FULL_DCG.regularizer == "sm" and Variant.FULL_DCG.filter_source == "sm"
    assert Variant.FILTER_ONLY_AUG.filter_scope == "augmented"
    assert Variant.FILTER_ONLY_ORI.filter_scope == "original"
    assert Variant.RANDOM_META_SPLIT.random_split
    assert len(ABLATION_VARIANTS) == 8
    assert DISCUSSION_VARIANTS[0] is Variant.FULL_DCG


def test_plays_game_only_when_needed():
    """Test that ω = k = 0 switches the game off."""
    assert not TrainConfig(omega=0.0, k=0).plays_game
    assert TrainConfig(omega=0.0, k=1).plays_game
    assert not TrainConfig(variant=Variant.AUG_ONLY, omega=0.0, k=0).plays_game


def test_seed_summary():
    """Test mean and population standard deviation."""
    summary = RunStatistics.seed_summary([0.5, 0.7])
    assert summary["mean"] == pytest.approx(0.6)
    assert summary["std"] == pytest.approx(0.1)
    assert summary["runs"] == 2
    assert RunStatistics.seed_summary([]) == {"mean": 0.0, "std": 0.0, "runs": 0}


def test_spearman_and_decreasing_steps():
    """Test curve statistics on hand-made curves."""
    assert RunStatistics.spearman([0, 1, 2, 3], [0.1, 0.2, 0.4, 0.5]) == pytest.approx(1.0)
    assert RunStatistics.spearman([0, 1, 2], [0.3, 0.3, 0.3]) == 0.0
    assert RunStatistics.spearman([0], [0.3]) == 0.0
    assert RunStatistics.decreasing_steps([1.0, 0.5, 0.7, 0.2]) == 2
    assert RunStatistics.decreasing_steps([0.1, 0.1, 0.2]) == 0


def test_accuracy_above_chance():
    """Test the 1/num_classes threshold."""
    assert RunStatistics.accuracy_above_chance(0.2, 7)
    assert not RunStatistics.accuracy_above_chance(0.1, 7)


def test_metrics_record_write(tmp_path):
    """Test metrics.csv columns and result.json contents."""
    record = MetricsRecord(epochs=[EpochMetrics(1, 0.01, 1.9, 2.0, 0.003, 0.25, 4, 6, 0.42)],
                           summary={"final_accuracy": 0.42, "variant": "full-DCG"})
    record.write(tmp_path)
    frame = pd.read_csv(tmp_path / "metrics.csv")
    assert list(frame.columns) == METRICS_COLUMNS
    assert frame["heldout_accuracy"].iloc[0] == pytest.approx(0.42)
    assert json.loads((tmp_path / "result.json").read_text())["final_accuracy"] == 0.42
    assert record.final_accuracy == pytest.approx(0.42)


def test_parallel_runner_inline_captures_failures():
    """Test ordered results and failure capture without worker processes."""
    config = TrainConfig()
    jobs = [RunJob(key=("a", s), config=config, held_out="D0", seed=s) for s in (2, -1, 0)]
    runner = ParallelRunner(max_workers=1)
    results = runner.run_parallel(jobs, _echo_job)
    assert [r["key"] for r in results] == [("a", 2), ("a", -1), ("a", 0)]
    assert [r["success"] for r in results] == [True, False, True]
    assert "negative seed" in results[1]["error"]
    frame = runner.results_to_dataframe()
    assert list(frame["seed"]) == [2, 0]
    assert "nested" not in frame.columns


def test_train_smoke(dataset, tiny_config, tmp_path):
    """Test one short run end to end with its artifacts."""
    result = train(tiny_config, dataset, "D3", seed=0, out_dir=tmp_path)
    assert 0.0 <= result.final_accuracy <= 1.0
    assert len(result.record.epochs) == 1
    summary = result.record.summary
    assert summary["held_out"] == "D3"
    assert "D3" not in summary["source_domains"]
    assert summary["clamp_fraction"] >= 0.0
    for name in ("metrics.csv", "result.json", "scoreboard.json", "model.ckpt"):
        assert (tmp_path / name).exists()
    assert all(board_id not in {s.id for s in dataset.domains["D3"]} for board_id in result.board.participation)


def test_train_is_reproducible(dataset, tiny_config, tmp_path):
    """Test byte-identical artifacts for two runs with the same seed."""
    train(tiny_config, dataset, "D1", seed=3, out_dir=tmp_path / "a")
    train(tiny_config, dataset, "D1", seed=3, out_dir=tmp_path / "b")
    for name in ("metrics.csv", "result.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_baseline_without_game(dataset, tiny_config):
    """Test a baseline run that never plays the game."""
    result = train(tiny_config.for_variant(Variant.BASELINE), dataset, "D0", seed=1)
    assert result.record.summary["game_iterations"] == 0
    assert result.record.summary["filtered_total"] == 0


def test_disabled_game_matches_aug_only(dataset, tiny_config):
    """Test that full-DCG with ω = 0 and k = 0 trains exactly like aug-only."""
    config = tiny_config.for_variant(Variant.FULL_DCG, epochs=2, omega=0.0, k=0)
    dcg = train(config, dataset, "D1", seed=5)
    aug = train(tiny_config.for_variant(Variant.AUG_ONLY, epochs=2), dataset, "D1", seed=5)
    assert dcg.record.summary["game_iterations"] == 0
    np.testing.assert_array_equal(dcg.params.flatten(), aug.params.flatten())
    assert [e.total_loss for e in dcg.record.epochs] == [e.total_loss for e in aug.record.epochs]


def test_filter_with_k_zero_is_inert(dataset, tiny_config):
    """Test that k = 0 leaves the trajectory of the regularized run untouched."""
    filtered = train(tiny_config.for_variant(Variant.FULL_DCG, epochs=2, k=0), dataset, "D2", seed=6)
    plain = train(tiny_config.for_variant(Variant.AUG_LSM, epochs=2), dataset, "D2", seed=6)
    assert filtered.record.summary["filtered_total"] == 0
    np.testing.assert_array_equal(filtered.params.flatten(), plain.params.flatten())
    assert [e.total_loss for e in filtered.record.epochs] == [e.total_loss for e in plain.record.epochs]
    assert [e.lsm_mean for e in filtered.record.epochs] == [e.lsm_mean for e in plain.record.epochs]


def _originals_score_highest(trainer):
    originals = trainer.originals[:4]
    augmented = augment_batch(originals, np.random.default_rng(0), 1.0, IdAllocator())
    inputs = CoalitionInputs(originals + augmented)
    weights = np.array([10.0] * len(originals) + [0.1] * len(augmented))[:, None]
    value = (inputs.matrix * Tensor(weights)).sum()
    outcome = GameOutcome(branches=OrderedDict(), raw_gap=value, sm=value, maml=value)
    return trainer._select(outcome, inputs, limit=len(inputs.samples) - 1), {s.id for s in augmented}


def test_filter_only_aug_never_discards_originals(dataset, tiny_config):
    """Test that the augmented-only scope discards augmented samples even when originals score higher."""
    trainer = Trainer(tiny_config.for_variant(Variant.FILTER_ONLY_AUG), dataset, "D3", seed=0)
    discard, augmented_ids = _originals_score_highest(trainer)
    assert len(discard) == tiny_config.k
    assert set(discard) <= augmented_ids
    trainer = Trainer(tiny_config.for_variant(Variant.FULL_DCG), dataset, "D3", seed=0)
    discard, augmented_ids = _originals_score_highest(trainer)
    assert set(discard).isdisjoint(augmented_ids)


@pytest.mark.parametrize("variant", [Variant.BASELINE, Variant.FULL_DCG])
def test_default_domains_beat_chance(variant):
    """Test that a short run on the default domains lands above chance on the held-out domain."""
    dataset = generate(default_manifest(samples_per_domain=40, seed=0))
    config = TrainConfig(epochs=15, batch_size=16, lr=0.005, omega=0.1, k=2, seeds=(0,), hidden=(32,))
    result = train(config.for_variant(variant), dataset, "D0", seed=0)
    assert result.final_accuracy > 1.0 / dataset.manifest.num_classes
    assert result.record.summary["above_chance"] is True


def test_too_few_source_domains(dataset, tiny_config):
    """Test that V+1 source domains are required."""
    config = tiny_config.for_variant(Variant.FULL_DCG, V=3)
    with pytest.raises(ConfigError, match="V\\+1"):
        Trainer(config, dataset, "D0", seed=0)


def test_held_out_sample_is_a_leak(dataset, tiny_config):
    """Test that a held-out sample cannot enter training."""
    trainer = Trainer(tiny_config, dataset, "D2", seed=0)
    with pytest.raises(TargetLeakError):
        trainer._assert_isolated(dataset.domains["D2"][:1])
    trainer._assert_isolated(dataset.domains["D0"][:2])


def test_variant_table_hand_made():
    """Test per-domain means and the avg column."""
    runs = pd.DataFrame({
        "variant": ["baseline"] * 4,
        "held_out": ["D0", "D0", "D1", "D1"],
        "seed": [0, 1, 0, 1],
        "final_accuracy": [0.4, 0.6, 0.2, 0.4],
    })
    means, stds = variant_table(runs, [Variant.BASELINE], ["D0", "D1"])
    assert means.loc["baseline", "D0"] == pytest.approx(0.5)
    assert means.loc["baseline", "avg"] == pytest.approx(0.4)
    assert stds.loc["baseline", "D1"] == pytest.approx(0.1)
    assert stds.loc["baseline", "avg"] == pytest.approx(0.1)


def test_curve_statistics_hand_made():
    """Test per-variant, per-seed curve statistics."""
    curves = pd.DataFrame({"variant": ["x"] * 3, "N": [4, 0, 8], "seed": [0] * 3, "accuracy": [0.5, 0.4, 0.45]})
    stats = curve_statistics(curves)
    assert len(stats) == 1
    assert stats["decreasing_steps"].iloc[0] == 1
    assert stats["spearman"].iloc[0] == pytest.approx(0.5)


def test_ablate_small(dataset, tiny_config, tmp_path):
    """Test two variants on one held-out domain."""
    means, stds = ablate(tiny_config, dataset, variants=(Variant.BASELINE, Variant.AUG_ONLY),
                         held_outs=["D3"], out_dir=tmp_path)
    assert list(means.index) == ["baseline", "aug-only"]
    assert list(means.columns) == ["D3", "avg"]
    assert np.all((means.values >= 0.0) & (means.values <= 1.0))
    for name in ("ablation_runs.csv", "ablation_mean.csv", "ablation_std.csv"):
        assert (tmp_path / name).exists()


def test_diversity_sweep_empty_pool_is_baseline(dataset, tiny_config):
    """Test that aug-only at N = 0 reproduces training without augmentation."""
    curves, _ = diversity_sweep(tiny_config, dataset, "D3", [0], variants=(Variant.AUG_ONLY,))
    baseline = train(tiny_config.for_variant(Variant.BASELINE), dataset, "D3", seed=0)
    assert curves["accuracy"].iloc[0] == baseline.final_accuracy


def test_diversity_sweep_small(dataset, tiny_config, tmp_path):
    """Test the sweep table over two pool sizes."""
    curves, stats = diversity_sweep(tiny_config, dataset, "D3", [0, 4], variants=(Variant.AUG_ONLY,),
                                    out_dir=tmp_path)
    assert list(curves["N"]) == [0, 4]
    assert list(curves.columns) == ["variant", "N", "seed", "accuracy"]
    assert len(stats) == 1
    assert (tmp_path / "sweep.csv").exists()
    with pytest.raises(ConfigError):
        diversity_sweep(tiny_config, dataset, "D3", [4, 0])


def test_sensitivity_small(dataset, tiny_config):
    """Test the (ω, k) grid flags."""
    grid = sensitivity(tiny_config, dataset, "D3", omegas=[0.0, 0.1], ks=[0, 3])
    assert len(grid) == 4
    assert list(grid["reference_region"]) == [False, False, False, True]
    assert grid["near_best"].any()
    assert (grid["runs"] == 1).all()


def test_noise_filter_requires_noise(dataset, tiny_config):
    """Test that a clean dataset cannot be used for the noise study."""
    with pytest.raises(ConfigError, match="no label noise"):
        noise_filter_study(tiny_config, dataset, "D3")


def test_noise_filter_study_small(tiny_config, tmp_path):
    """Test the per-seed noise table on a noisy dataset."""
    noisy = generate(default_manifest(samples_per_domain=10, label_noise=0.2, seed=1))
    table, median = noise_filter_study(tiny_config, noisy, "D0", out_dir=tmp_path)
    assert len(table) == 1
    assert median >= 0.0
    assert {"noisy_frequency", "clean_frequency", "ratio"} <= set(table.columns)
    assert (tmp_path / "noise_filter.csv").exists()


def test_discussion_variants_small(dataset, tiny_config, tmp_path):
    """Test the four discussion variants on one held-out domain."""
    means, stds = discussion_variants(tiny_config, dataset, held_outs=["D3"], out_dir=tmp_path)
    assert list(means.index) == [v.value for v in DISCUSSION_VARIANTS]
    assert (stds.values == 0.0).all()
    assert (tmp_path / "discussion_mean.csv").exists()
