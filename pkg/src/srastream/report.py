"""Figure rendering for evaluation reports.

The metric code stays data-only; this module turns its outputs into PNG
files that sit next to the delimited reports. Everything goes through the
Agg backend so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import AlarmEval


def plot_score_series(
    scores: np.ndarray,
    path,
    change_points: list[int] | None = None,
    title: str = "change score",
) -> None:
    """Score trace over time with the true change points marked."""
    scores = np.asarray(scores, dtype=float)
    fig, ax = plt.subplots(figsize=(9, 3))
    ax.plot(np.arange(1, len(scores) + 1), scores, lw=0.6, color="tab:blue")
    for cp in change_points or []:
        ax.axvline(cp, color="tab:red", lw=0.8, ls="--", alpha=0.7)
    ax.set_xlabel("t")
    ax.set_ylabel("score")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_alarm_curve(alarm: AlarmEval, path) -> None:
    """Benefit-recall versus false-alarm-rate curve with its AUC."""
    curve = np.asarray(alarm.curve(), dtype=float)
    fig, ax = plt.subplots(figsize=(4, 4))
    if curve.size:
        order = np.argsort(curve[:, 0], kind="stable")
        xs = np.concatenate([[0.0], curve[order, 0], [1.0]])
        ys = np.concatenate([[0.0], curve[order, 1], [1.0]])
        ax.plot(xs, ys, marker=".", color="tab:blue")
    ax.plot([0, 1], [0, 1], color="gray", lw=0.8, ls=":")
    ax.set_xlabel("false alarm rate")
    ax.set_ylabel("benefit recall")
    ax.set_title(f"alarm curve (AUC={alarm.auc:.3f})")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_roc_curve(scores: np.ndarray, labels: np.ndarray, path) -> None:
    """Standard ROC curve from anomaly scores and 0/1 labels."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    order = np.argsort(-scores, kind="stable")
    tp = np.cumsum(labels[order])
    fp = np.cumsum(~labels[order])
    n_pos = max(int(labels.sum()), 1)
    n_neg = max(int((~labels).sum()), 1)
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.plot(
        np.concatenate([[0.0], fp / n_neg]),
        np.concatenate([[0.0], tp / n_pos]),
        color="tab:blue",
    )
    ax.plot([0, 1], [0, 1], color="gray", lw=0.8, ls=":")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("ROC")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_mean_tracking(
    estimated_means: np.ndarray,
    true_means: np.ndarray,
    path,
) -> None:
    """First-coordinate component means: estimate versus ground truth."""
    est = np.asarray(estimated_means, dtype=float)
    true = np.asarray(true_means, dtype=float)
    ts = np.arange(1, est.shape[0] + 1)
    fig, ax = plt.subplots(figsize=(9, 3))
    for k in range(true.shape[1]):
        ax.plot(ts, true[:, k, 0], color="black", lw=0.8, alpha=0.6)
    for k in range(est.shape[1]):
        ax.plot(ts, est[:, k, 0], lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("component mean")
    ax.set_title("mean tracking")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report_figures(
    outdir,
    prefix: str = "report",
    scores: np.ndarray | None = None,
    change_points: list[int] | None = None,
    alarm: AlarmEval | None = None,
    roc_scores: np.ndarray | None = None,
    roc_labels: np.ndarray | None = None,
    estimated_means: np.ndarray | None = None,
    true_means: np.ndarray | None = None,
) -> list[str]:
    """Render every figure the supplied pieces allow; returns written paths."""
    import os

    written = []

    def target(stem: str) -> str:
        return os.path.join(str(outdir), f"{prefix}_{stem}.png")

    if scores is not None:
        p = target("scores")
        plot_score_series(scores, p, change_points)
        written.append(p)
    if alarm is not None:
        p = target("alarm_curve")
        plot_alarm_curve(alarm, p)
        written.append(p)
    if roc_scores is not None and roc_labels is not None:
        p = target("roc")
        plot_roc_curve(roc_scores, roc_labels, p)
        written.append(p)
    if estimated_means is not None and true_means is not None:
        p = target("mean_tracking")
        plot_mean_tracking(estimated_means, true_means, p)
        written.append(p)
    return written
