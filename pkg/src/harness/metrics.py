"""Per-epoch records and the statistics computed over runs."""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from scipy import stats

logger = logging.getLogger(__name__)

METRICS_COLUMNS = ["epoch", "lr", "train_loss", "total_loss", "lsm_mean", "clamp_fraction",
                   "game_iterations", "filtered", "heldout_accuracy"]


@dataclass
class EpochMetrics:
    """One row of metrics.csv."""
    epoch: int
    lr: float
    train_loss: float
    total_loss: float
    lsm_mean: float
    clamp_fraction: float
    game_iterations: int
    filtered: int
    heldout_accuracy: float


@dataclass
class MetricsRecord:
    """Everything a run reports: epoch rows plus the final summary."""
    epochs: List[EpochMetrics] = field(default_factory=list)
    summary: Dict = field(default_factory=dict)

    @property
    def final_accuracy(self) -> float:
        return float(self.summary.get("final_accuracy", 0.0))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(e) for e in self.epochs], columns=METRICS_COLUMNS)

    def write(self, out_dir: Union[str, Path]) -> Path:
        """metrics.csv and result.json; no timestamps so reruns are byte-identical."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(out_dir / "metrics.csv", index=False, float_format="%.10g")
        with open(out_dir / "result.json", "w", encoding="utf-8") as f:
            json.dump(self.summary, f, indent=2, sort_keys=True)
            f.write("\n")
        return out_dir


class RunStatistics:
    """Statistics over seeds and sweep curves."""

    @staticmethod
    def seed_summary(values: Sequence[float]) -> Dict[str, float]:
        """Mean and population standard deviation.

        Args:
            values: One value per seed

        Returns:
            {'mean', 'std', 'runs'}
        """
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            return {"mean": 0.0, "std": 0.0, "runs": 0}
        return {"mean": float(values.mean()), "std": float(values.std(ddof=0)), "runs": int(values.size)}

    @staticmethod
    def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
        """Spearman rank correlation; 0.0 when undefined (constant input)."""
        if len(xs) < 2:
            return 0.0
        rho = stats.spearmanr(xs, ys)[0]
        return 0.0 if rho is None or np.isnan(rho) else float(rho)

    @staticmethod
    def decreasing_steps(ys: Sequence[float]) -> int:
        """Count of adjacent pairs where the curve strictly drops."""
        ys = np.asarray(ys, dtype=np.float64)
        return int(np.sum(np.diff(ys) < 0))

    @staticmethod
    def accuracy_above_chance(accuracy: float, num_classes: int) -> bool:
        return accuracy > 1.0 / num_classes
