"""Input x Gradient scores and top-k selection."""
import json
import logging
import warnings
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Union

import numpy as np

from ..autodiff import Tensor, grad
from ..data.sample import Provenance, Sample
from ..game.coalitions import CoalitionInputs
from ..utils.errors import ContractError

logger = logging.getLogger(__name__)


class ScoreBoard:
    """
    Per-iteration scores plus counters accumulated over a run.

    Scores hold exactly the samples that took part in this iteration's
    coalitions. Top/bottom counts record how often a sample was selected
    among the k highest / lowest scores; participation counts how often it
    was scored at all.
    """

    def __init__(self):
        self.scores: Dict[str, float] = {}
        self.top_counts: Counter = Counter()
        self.bottom_counts: Counter = Counter()
        self.participation: Counter = Counter()
        self.domains: Dict[str, str] = {}
        self.origins: Dict[str, str] = {}
        self.provenance: Dict[str, Provenance] = {}

    def update(self, scores: Mapping[str, float], samples: Iterable[Sample]) -> None:
        """Replace this iteration's scores and count participation."""
        self.scores = dict(scores)
        for sample in samples:
            if sample.id not in self.scores:
                continue
            self.participation[sample.id] += 1
            self.domains[sample.id] = sample.domain_id
            self.origins[sample.id] = sample.origin.value
            if sample.provenance is not None:
                self.provenance[sample.id] = sample.provenance

    def record_selection(self, top: Iterable[str], bottom: Iterable[str]) -> None:
        self.top_counts.update(top)
        self.bottom_counts.update(bottom)

    def clear_scores(self) -> None:
        self.scores = {}

    def top_frequency(self, sample_id: str) -> float:
        """Fraction of a sample's participations in which it was discarded."""
        seen = self.participation.get(sample_id, 0)
        return self.top_counts.get(sample_id, 0) / seen if seen else 0.0

    def to_dict(self) -> Dict:
        ids = sorted(self.participation)
        return {
            "samples": [
                {"id": i, "domain": self.domains[i], "origin": self.origins[i],
                 "participation": self.participation[i], "top_count": self.top_counts.get(i, 0),
                 "bottom_count": self.bottom_counts.get(i, 0),
                 "provenance": self.provenance[i].to_dict() if i in self.provenance else None}
                for i in ids
            ]
        }

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ScoreBoard":
        board = cls()
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        for entry in data["samples"]:
            sample_id = entry["id"]
            board.participation[sample_id] = entry["participation"]
            if entry["top_count"]:
                board.top_counts[sample_id] = entry["top_count"]
            if entry["bottom_count"]:
                board.bottom_counts[sample_id] = entry["bottom_count"]
            board.domains[sample_id] = entry["domain"]
            board.origins[sample_id] = entry["origin"]
            if entry.get("provenance"):
                board.provenance[sample_id] = Provenance.from_dict(entry["provenance"])
        return board


def score_samples(value: Tensor, inputs: CoalitionInputs,
                  participants: Optional[Sequence[Sample]] = None) -> Dict[str, float]:
    """score(x) = Σ x ⊙ ∇x value for every participant.

    Args:
        value: Scalar built from the tracked inputs (L_sm or L_maml)
        inputs: The shared coalition inputs the value was built from
        participants: Samples to score; all input rows when omitted

    Returns:
        Mapping sample id -> score
    """
    if not inputs.tracked:
        raise ContractError("inputs were not grad-tracked when the regularizer was built")
    (gradient,) = grad(value, [inputs.matrix])
    per_row = np.sum(inputs.matrix.data * gradient.data, axis=1)
    samples = inputs.samples if participants is None else participants
    return {s.id: float(per_row[inputs.index[s.id]]) for s in samples}


def _ranked(board: ScoreBoard, eligible: Optional[Set[str]], descending: bool) -> List[str]:
    ids = [i for i in board.scores if eligible is None or i in eligible]
    sign = -1.0 if descending else 1.0
    return sorted(ids, key=lambda i: (sign * board.scores[i], i))


def _clamp(k: int, available: int) -> int:
    if k < 0:
        raise ContractError(f"k must be >= 0, got {k}")
    if k > available:
        message = f"k={k} exceeds the {available} scored samples; selecting {available}"
        warnings.warn(message, RuntimeWarning)
        logger.warning(message)
        return available
    return k


def _has_signal(board: ScoreBoard, eligible: Optional[Set[str]], signal: bool) -> bool:
    if not signal:
        return False
    return any(board.scores[i] != 0.0 for i in board.scores if eligible is None or i in eligible)


def select_discard(board: ScoreBoard, k: int, eligible: Optional[Set[str]] = None,
                   signal: bool = True) -> List[str]:
    """The k highest-scoring ids, ties broken by ascending id.

    Args:
        board: Current scores
        k: How many to discard
        eligible: Restrict selection to these ids
        signal: False when the regularizer was clamped this iteration

    Returns:
        Ids to cast out of the supervision loss, highest score first
    """
    ranked = _ranked(board, eligible, descending=True)
    k = _clamp(k, len(ranked))
    if k == 0 or not _has_signal(board, eligible, signal):
        return []
    return ranked[:k]


def select_keep(board: ScoreBoard, k: int, eligible: Optional[Set[str]] = None,
                signal: bool = True) -> List[str]:
    """The k lowest-scoring ids (bottom-k), for the discard dump."""
    ranked = _ranked(board, eligible, descending=False)
    k = min(max(k, 0), len(ranked))
    if k == 0 or not _has_signal(board, eligible, signal):
        return []
    return ranked[:k]
