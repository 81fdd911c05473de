"""Figure rendering for evaluation reports.

Renders precision-recall curves and the AUC-versus-k summary to image files
next to the delimited output, so reports are inspectable without replotting.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def save_pr_curves(curves: dict, path) -> Path:
    """Plot one line per labeled curve; curves map label -> PrCurve."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for label, curve in curves.items():
        recalls = [0.0] + [p.recall for p in curve.points]
        precisions = ([curve.points[0].precision] if curve.points else [1.0])
        precisions += [p.precision for p in curve.points]
        ax.plot(recalls, precisions, label=f"{label} (auc={curve.auc:.3f})")
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower left", fontsize=8)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    path = Path(path)
    fig.savefig(path, bbox_inches="tight", dpi=150)
    plt.close(fig)
    return path


def save_auc_vs_k(rows, path) -> Path:
    """AUC for both policies against k, with mean parse time on a twin axis."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ks = [row.k for row in rows]
    ax.plot(ks, [row.strict_auc for row in rows], marker="o", label="strict")
    ax.plot(ks, [row.contains_auc for row in rows], marker="s",
            label="contains")
    ax.set_xscale("log")
    ax.set_xlabel("k")
    ax.set_ylabel("area under PR curve")
    ax.set_ylim(0.0, 1.05)
    time_ax = ax.twinx()
    time_ax.plot(ks, [row.mean_parse_seconds for row in rows],
                 color="gray", linestyle="--", label="mean parse time")
    time_ax.set_ylabel("mean parse time (s)")
    handles, labels = ax.get_legend_handles_labels()
    more, more_labels = time_ax.get_legend_handles_labels()
    ax.legend(handles + more, labels + more_labels, loc="lower right",
              fontsize=8)
    path = Path(path)
    fig.savefig(path, bbox_inches="tight", dpi=150)
    plt.close(fig)
    return path
