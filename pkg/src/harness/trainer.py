"""The training loop: augmentation, coalition game, filter and the outer step."""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from ..augment import IdAllocator, augment_batch, build_augmented_pool
from ..autodiff import Graph, backward
from ..data import Dataset, Sample, labels_of, leave_one_out, stack_features
from ..filter import ScoreBoard, filtered_supervision, score_samples, select_discard, select_keep
from ..game import (ClassifierGame, CoalitionInputs, GameConfig, GameOutcome, fit_coalition_sizes,
                    meta_split, play, sample_coalitions)
from ..model import LayerSpec, ModelParams, OptimizerState, accuracy, init_params, save_checkpoint, sgd_step
from ..utils.errors import ConfigError, TargetLeakError
from ..utils.seeding import spawn_streams
from .config import TrainConfig
from .metrics import EpochMetrics, MetricsRecord, RunStatistics

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """A finished run: metrics, final parameters and the filter scoreboard."""
    record: MetricsRecord
    params: ModelParams
    board: ScoreBoard

    @property
    def final_accuracy(self) -> float:
        return self.record.final_accuracy


class Trainer:
    """
    One training run on all source domains of a dataset with one domain held out.

    Every iteration samples a mini-batch, augments it, plays the coalition
    game on a meta split of the batch, filters the top-k scored samples out
    of the supervision loss and takes one SGD step on L_sup + ω·L_reg.
    """

    def __init__(self, config: TrainConfig, dataset: Dataset, held_out: str, seed: int):
        config.validate()
        self.config = config
        self.sources, self.target = leave_one_out(dataset, held_out)
        if len(self.sources) < config.V + 1:
            raise ConfigError(
                f"{len(self.sources)} source domain(s) left after holding out {held_out}; "
                f"the meta split needs at least V+1={config.V + 1}")
        self.held_out = held_out
        self.seed = seed
        self.streams = spawn_streams(seed)
        self.originals = [s for samples in self.sources.values() for s in samples]
        self.held_ids: Set[str] = {s.id for s in self.target}
        manifest = dataset.manifest
        self.spec = LayerSpec(input_dim=int(np.prod(manifest.image_shape)), num_classes=manifest.num_classes,
                              hidden=config.hidden, activation=config.activation)
        self.model = ClassifierGame(self.spec)
        self.allocator = IdAllocator()
        self.board = ScoreBoard()
        self.pool: Optional[List[Sample]] = None
        if config.variant.augment and config.augmented_cap is not None:
            self.pool = build_augmented_pool(self.sources, config.augmented_cap, self.streams["pool"],
                                             config.eta, self.allocator)
        self._target_x = stack_features(self.target)
        self._target_y = labels_of(self.target)

    def _assert_isolated(self, samples: Sequence[Sample]) -> None:
        for sample in samples:
            if sample.id in self.held_ids or sample.domain_id == self.held_out:
                raise TargetLeakError(f"held-out sample {sample.id} reached training")
            if sample.provenance is not None and (
                    any(p in self.held_ids for p in sample.provenance.parent_ids)
                    or self.held_out in sample.provenance.parent_domains):
                raise TargetLeakError(f"augmented sample {sample.id} has a held-out parent")

    def _batches(self) -> List[List[Sample]]:
        order = self.streams["batches"].permutation(len(self.originals))
        size = self.config.batch_size
        chunks = [[self.originals[i] for i in order[start:start + size]]
                  for start in range(0, len(order), size)]
        return [chunk for chunk in chunks if len(chunk) >= 2]

    def _augment(self, batch: List[Sample]) -> List[Sample]:
        if not self.config.variant.augment:
            return []
        if self.pool is None:
            return augment_batch(batch, self.streams["augment"], self.config.eta, self.allocator)
        if not self.pool:
            return []
        count = min(len(batch), len(self.pool))
        picks = self.streams["augment"].choice(len(self.pool), size=count, replace=False)
        return [self.pool[i] for i in sorted(picks)]

    def _play(self, params: ModelParams, batch: List[Sample], augmented: List[Sample],
              alpha: float) -> Optional[Tuple[GameOutcome, CoalitionInputs]]:
        config = self.config
        by_domain: "OrderedDict[str, List[Sample]]" = OrderedDict()
        for sample in batch:
            by_domain.setdefault(sample.domain_id, []).append(sample)
        if len(by_domain) <= config.V:
            logger.debug(f"batch spans {len(by_domain)} domain(s); game skipped")
            return None
        split = meta_split(by_domain, augmented, config.V, self.streams["game"],
                           random_aug=config.variant.random_split)
        self._assert_isolated(split.pool + split.meta_test)
        if not split.pool or not split.meta_test:
            return None
        sizes = fit_coalition_sizes(len(split.pool), config.batch_size, config.coalition_sizes)
        quad = sample_coalitions(split.pool, sizes, self.streams["game"])
        track = config.variant.filter_source is not None and config.k > 0
        inputs = CoalitionInputs(quad.participants(), track=track)
        game = GameConfig(alpha=alpha, V=config.V, sizes=sizes, second_order=config.second_order)
        return play(self.model, params, quad, split.meta_test, game, inputs), inputs

    def _select(self, outcome: GameOutcome, inputs: CoalitionInputs, limit: int) -> List[str]:
        config = self.config
        value = outcome.sm if config.variant.filter_source == "sm" else outcome.maml
        self.board.update(score_samples(value, inputs), inputs.samples)
        scope = config.variant.filter_scope
        eligible = None
        if scope != "all":
            wanted = scope == "augmented"
            eligible = {s.id for s in inputs.samples if s.is_augmented == wanted}
        signal = value.item() > 0.0
        k = min(config.k, limit)
        discard = select_discard(self.board, k, eligible, signal)
        self.board.record_selection(discard, select_keep(self.board, k, eligible, signal))
        if discard:
            logger.debug(f"discarding {discard}")
        return discard

    def run(self) -> RunResult:
        """Train for the configured number of epochs and evaluate on the held-out domain."""
        config = self.config
        logger.info(f"Training {config.variant.value} held_out={self.held_out} seed={self.seed} "
                    f"({len(self.originals)} source samples, {len(self.sources)} domains)")
        params = init_params(self.spec, self.streams["init"])
        state = OptimizerState.for_params(params, lr=config.lr, momentum=config.momentum,
                                          weight_decay=config.weight_decay, decay_factor=config.lr_decay,
                                          decay_at=config.decay_at)
        record = MetricsRecord()
        iterations = 0
        lsm_values: List[float] = []
        clamped_total = 0
        filtered_total = 0

        for epoch in range(config.epochs):
            fraction = epoch / config.epochs
            lr = state.lr_at(fraction)
            sup_losses, totals, epoch_lsm = [], [], []
            clamped = filtered = 0
            for batch in self._batches():
                with Graph():
                    self._assert_isolated(batch)
                    augmented = self._augment(batch)
                    self._assert_isolated(augmented)
                    everything = batch + augmented
                    discard: List[str] = []
                    regularizer = None
                    if config.plays_game:
                        played = self._play(params, batch, augmented, alpha=lr)
                        if played is not None:
                            outcome, inputs = played
                            epoch_lsm.append(outcome.sm.item())
                            clamped += int(outcome.clamped)
                            if config.variant.filter_source is not None and config.k > 0:
                                discard = self._select(outcome, inputs, limit=len(everything) - 1)
                            if config.variant.regularizer is not None and config.omega > 0:
                                regularizer = outcome.sm if config.variant.regularizer == "sm" else outcome.maml
                    supervision = filtered_supervision(params, everything, discard)
                    total = supervision if regularizer is None else supervision + regularizer.scale(config.omega)
                    grads = backward(total, params)
                    params, state = sgd_step(params, grads, state, fraction)
                    sup_losses.append(supervision.item())
                    totals.append(total.item())
                    filtered += len(discard)
                    iterations += 1

            heldout = accuracy(params, self._target_x, self._target_y)
            record.epochs.append(EpochMetrics(
                epoch=epoch + 1, lr=lr, train_loss=float(np.mean(sup_losses)), total_loss=float(np.mean(totals)),
                lsm_mean=float(np.mean(epoch_lsm)) if epoch_lsm else 0.0,
                clamp_fraction=clamped / len(epoch_lsm) if epoch_lsm else 0.0,
                game_iterations=len(epoch_lsm), filtered=filtered, heldout_accuracy=heldout))
            lsm_values.extend(epoch_lsm)
            clamped_total += clamped
            filtered_total += filtered
            logger.info(f"epoch {epoch + 1}/{config.epochs} loss={record.epochs[-1].train_loss:.4f} "
                        f"lsm={record.epochs[-1].lsm_mean:.3e} acc={heldout:.3f}")

        record.summary = {
            "variant": config.variant.value,
            "held_out": self.held_out,
            "seed": self.seed,
            "config": config.to_dict(),
            "source_domains": list(self.sources.keys()),
            "num_classes": self.spec.num_classes,
            "chance": 1.0 / self.spec.num_classes,
            "iterations": iterations,
            "game_iterations": len(lsm_values),
            "mean_lsm": float(np.mean(lsm_values)) if lsm_values else 0.0,
            "clamp_fraction": clamped_total / len(lsm_values) if lsm_values else 0.0,
            "filtered_total": filtered_total,
            "final_train_loss": record.epochs[-1].train_loss,
            "final_accuracy": record.epochs[-1].heldout_accuracy,
            "above_chance": RunStatistics.accuracy_above_chance(record.epochs[-1].heldout_accuracy,
                                                                self.spec.num_classes),
        }
        logger.info(f"Finished {config.variant.value} held_out={self.held_out} seed={self.seed}: "
                    f"accuracy={record.final_accuracy:.4f}")
        return RunResult(record=record, params=params, board=self.board)


def train(config: TrainConfig, dataset: Dataset, held_out: str, seed: int,
          out_dir: Optional[Union[str, Path]] = None) -> RunResult:
    """Run one training job and optionally write its artifacts.

    Args:
        config: Training configuration
        dataset: Dataset with every domain
        held_out: Domain never touched during training
        seed: Run seed
        out_dir: When given, receives metrics.csv, result.json,
            scoreboard.json and model.ckpt

    Returns:
        RunResult
    """
    result = Trainer(config, dataset, held_out, seed).run()
    if out_dir is not None:
        out_dir = Path(out_dir)
        result.record.write(out_dir)
        result.board.save(out_dir / "scoreboard.json")
        save_checkpoint(out_dir / "model.ckpt", result.params)
        logger.info(f"Wrote run artifacts to {out_dir}")
    return result
