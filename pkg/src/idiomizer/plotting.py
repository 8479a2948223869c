"""Render an evaluation report as a per-idiom bar chart."""
from __future__ import annotations

from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

METRICS = ("accuracy", "precision", "recall", "f1")


def plot_metrics(report: dict, path: Union[str, Path]) -> Path:
    """Write grouped bars of the four metrics for every row of ``report``."""
    labels = list(report)
    width = 0.2
    fig, ax = plt.subplots(figsize=(max(6.0, 0.8 * len(labels) + 2), 4.0), dpi=100)
    for k, metric in enumerate(METRICS):
        xs = [i + (k - 1.5) * width for i in range(len(labels))]
        ax.bar(xs, [report[label][metric] for label in labels], width, label=metric)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(loc="lower center", bbox_to_anchor=(0.5, 1.0), ncol=len(METRICS), fontsize=8, frameon=False)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, format="png", metadata={"Software": None})
    plt.close(fig)
    return out
