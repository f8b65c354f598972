"""Plots of sweep curves."""
import logging
import warnings
from pathlib import Path
from typing import Tuple, Union

import pandas as pd

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.figure import Figure
    MATPLOTLIB_AVAILABLE = True
except ImportError:
    MATPLOTLIB_AVAILABLE = False
    warnings.warn("Matplotlib not available. Install with: pip install matplotlib")

logger = logging.getLogger(__name__)

COLORS = ['#2E86AB', '#E63946', '#52B788', '#F4A261']


class SweepPlotter:
    """Accuracy against the number of augmented domains, one line per variant."""

    def __init__(self, figsize: Tuple[int, int] = (8, 5)):
        if not MATPLOTLIB_AVAILABLE:
            raise ImportError("Matplotlib is required for plotting")
        self.figsize = figsize

    def plot_curves(self, curves: pd.DataFrame, title: str = "Accuracy vs. augmented domains") -> "Figure":
        """
        Plot mean accuracy per N with a band of one std over seeds.

        Args:
            curves: Rows with columns variant, N, seed, accuracy

        Returns:
            Matplotlib figure
        """
        fig, ax = plt.subplots(figsize=self.figsize)
        grouped = curves.groupby(["variant", "N"])["accuracy"].agg(["mean", "std"]).reset_index()
        for color, (variant, rows) in zip(COLORS * 4, grouped.groupby("variant", sort=True)):
            rows = rows.sort_values("N")
            std = rows["std"].fillna(0.0)
            ax.plot(rows["N"], rows["mean"], marker="o", linewidth=2, color=color, label=variant)
            ax.fill_between(rows["N"], rows["mean"] - std, rows["mean"] + std, alpha=0.2, color=color)
        ax.set_title(title, fontsize=14, fontweight='bold')
        ax.set_xlabel("Augmented domains N", fontsize=12)
        ax.set_ylabel("Held-out accuracy", fontsize=12)
        ax.legend(loc='lower right')
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        return fig

    def save_svg(self, curves: pd.DataFrame, path: Union[str, Path]) -> Path:
        path = Path(path)
        fig = self.plot_curves(curves)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        logger.info(f"Wrote {path}")
        return path
