"""Chart rendering for the evaluation commands.

Figures are written next to the delimited reports: a grouped bar chart
of per-category correct rates for the segmentation comparison, and a
confusion-matrix heatmap for classifier evaluation.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .classifier import EvalReport
from .synth import CATEGORIES, SegReport


def save_seg_figure(report: SegReport, path: Union[str, Path]) -> None:
    """Grouped bars: correct-rate per category for both segmenters."""
    x = np.arange(len(CATEGORIES))
    plain = [report.plain[c].correct_rate * 100 for c in CATEGORIES]
    modified = [report.modified[c].correct_rate * 100 for c in CATEGORIES]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    width = 0.38
    bars_p = ax.bar(x - width / 2, plain, width, label="plain", color="#888888")
    bars_m = ax.bar(x + width / 2, modified, width, label="modified", color="#2b6cb0")
    for bars in (bars_p, bars_m):
        ax.bar_label(bars, fmt="%.1f", fontsize=8)
    ax.set_xticks(x)
    ax.set_xticklabels(CATEGORIES)
    ax.set_ylabel("correctly segmented (%)")
    ax.set_ylim(0, 110)
    ax.set_title("Bounding-box segmentation, plain vs modified")
    ax.legend(loc="lower right")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_confusion_figure(report: EvalReport, path: Union[str, Path]) -> None:
    """Heatmap of the true-by-predicted confusion counts."""
    n = len(report.class_ids)
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    im = ax.imshow(report.confusion, cmap="viridis", interpolation="nearest")
    fig.colorbar(im, ax=ax, label="samples")
    ax.set_xlabel("predicted class")
    ax.set_ylabel("true class")
    ax.set_title(
        f"accuracy {report.accuracy * 100:.2f}%  "
        f"(misclassification {report.misclassification * 100:.2f}%)"
    )
    if n <= 20:
        ax.set_xticks(range(n))
        ax.set_yticks(range(n))
        ax.set_xticklabels(report.class_ids, fontsize=7)
        ax.set_yticklabels(report.class_ids, fontsize=7)
        for i in range(n):
            for j in range(n):
                v = int(report.confusion[i, j])
                if v:
                    ax.text(j, i, str(v), ha="center", va="center", fontsize=7,
                            color="white")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
