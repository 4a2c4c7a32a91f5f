"""Evaluation protocols: segment MSEs, alarm curves and ROC AUC.

Three separate notions of quality live here. Segment MSEs score mean
tracking on synthetic streams with known ground truth. The alarm curve
scores change detection by trading total alarm benefit against false
alarms as the score threshold sweeps. ROC AUC scores pointwise anomaly
labels and is the plain Mann-Whitney statistic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy.stats import rankdata


@dataclass
class SegmentMse:
    """MSEs over the evaluation, before-change, after-change and total
    windows."""

    s_eval: float
    s_bc: float
    s_ac: float
    s_tot: float

    def as_dict(self) -> dict:
        return {
            "s_eval": self.s_eval,
            "s_bc": self.s_bc,
            "s_ac": self.s_ac,
            "s_tot": self.s_tot,
        }


def _matched_cost(est: np.ndarray, true: np.ndarray) -> np.ndarray:
    """Per-step squared error under the best component permutation.

    Mixture components carry no canonical order, so each time step is scored
    with the minimum-cost assignment between estimated and true means
    (exhaustive over permutations; K is small here).
    """
    T, K, d = est.shape
    best = np.full(T, np.inf)
    for perm in permutations(range(K)):
        cost = np.sum((est[:, perm, :] - true) ** 2, axis=(1, 2))
        best = np.minimum(best, cost)
    return best


def segment_mse(
    estimated_means: np.ndarray,
    true_means: np.ndarray,
    tau: int,
    t_star: int,
    T: int,
    eval_window: tuple[int, int] = (500, 999),
) -> SegmentMse:
    """Segment MSEs of a mean-trajectory estimate.

    Arrays are (T, K, d) aligned so that index i corresponds to time i+1.
    Totals run over (tau, T], before-change over (tau, t_star), after-change
    over (t_star, T] and the evaluation window over [a, b]; each divisor
    follows the protocol's literal normalization.
    """
    est = np.asarray(estimated_means, dtype=float)
    true = np.asarray(true_means, dtype=float)
    if est.shape != true.shape:
        raise ValueError("estimated and true mean series must align")
    if not tau < t_star < T or est.shape[0] < T:
        raise ValueError("require tau < t_star < T within the series")
    cost = _matched_cost(est, true)

    def window_sum(lo_t: int, hi_t: int) -> float:
        # inclusive time range [lo_t, hi_t]; time t lives at index t-1
        return float(np.sum(cost[lo_t - 1 : hi_t]))

    a, b = eval_window
    s_tot = window_sum(tau + 1, T) / (T - tau)
    s_bc = window_sum(tau + 1, t_star - 1) / (t_star - tau)
    s_ac = window_sum(t_star + 1, T) / (T - t_star)
    s_eval = window_sum(a, b) / (b - a)
    return SegmentMse(s_eval, s_bc, s_ac, s_tot)


def benefit(t: int, t_star: int, tau: int) -> float:
    """Triangular alarm credit: 1 - |t - t_star| / tau inside the tolerance
    window, 0 at and beyond it."""
    gap = abs(t - t_star)
    return 1.0 - gap / tau if gap < tau else 0.0


@dataclass
class AlarmEval:
    """Benefit-recall / false-alarm curve over a threshold sweep."""

    thresholds: np.ndarray
    benefit_recall: np.ndarray
    false_alarm_rate: np.ndarray
    auc: float
    degenerate: bool = False
    #: change-point matching convention carried in reports
    matching: str = field(default="nearest-change-point", repr=False)

    def curve(self) -> list[list[float]]:
        return [
            [float(f), float(r)]
            for f, r in zip(self.false_alarm_rate, self.benefit_recall)
        ]


def alarm_eval(
    scores: np.ndarray,
    change_points: list[int],
    tau: int,
    t_start: int,
    t_end: int,
    thresholds: np.ndarray | None = None,
) -> AlarmEval:
    """Sweep an alarm threshold over change scores and integrate the curve.

    ``scores[i]`` is the score at time i+1. For each threshold, times with
    score above it alarm. Every alarm is judged against its nearest change
    point; alarms with zero benefit are false alarms, and each change point
    is credited with the single best benefit among its alarms. The curve of
    (false-alarm rate, benefit recall), both normalized by their suprema
    over the sweep, is integrated by trapezoid with (0,0) and (1,1)
    appended.

    If no alarm ever earns benefit the AUC is defined as 0 and flagged.
    """
    scores = np.asarray(scores, dtype=float)
    ts = np.arange(t_start, t_end + 1)
    vals = scores[t_start - 1 : t_end]
    if not np.all(np.isfinite(vals)):
        raise ValueError("scores must be finite on the evaluation range")
    cps = np.asarray(sorted(change_points), dtype=int)
    if thresholds is None:
        thresholds = np.concatenate([[-np.inf], np.unique(vals), [np.inf]])
    thresholds = np.sort(np.asarray(thresholds, dtype=float))

    # nearest change point per time step, precomputed once
    if len(cps):
        idx = np.searchsorted(cps, ts)
        left = cps[np.clip(idx - 1, 0, len(cps) - 1)]
        right = cps[np.clip(idx, 0, len(cps) - 1)]
        nearest = np.where(np.abs(ts - left) <= np.abs(ts - right), left, right)
        gaps = np.abs(ts - nearest)
        bene = np.where(gaps < tau, 1.0 - gaps / tau, 0.0)
        cp_of = np.where(gaps < tau, nearest, -1)
    else:
        bene = np.zeros_like(vals)
        cp_of = np.full(len(ts), -1)

    # false alarms above each threshold, via the sorted false-step scores
    false_scores = np.sort(vals[bene == 0.0])
    false_counts = (
        len(false_scores) - np.searchsorted(false_scores, thresholds, side="right")
    ).astype(float)

    # per change point: best benefit among alarms above eps is a suffix max
    # over that point's steps sorted by score
    totals = np.zeros(len(thresholds))
    for cp in cps:
        sel = cp_of == cp
        if not np.any(sel):
            continue
        order = np.argsort(vals[sel], kind="stable")
        s_cp = vals[sel][order]
        b_cp = bene[sel][order]
        suffix = np.maximum.accumulate(b_cp[::-1])[::-1]
        suffix = np.concatenate([suffix, [0.0]])
        totals += suffix[np.searchsorted(s_cp, thresholds, side="right")]

    sup_b = totals.max(initial=0.0)
    sup_n = false_counts.max(initial=0.0)
    if sup_b == 0.0:
        return AlarmEval(
            thresholds,
            np.zeros_like(totals),
            false_counts / sup_n if sup_n else np.zeros_like(false_counts),
            auc=0.0,
            degenerate=True,
        )
    recall = totals / sup_b
    far = false_counts / sup_n if sup_n else np.zeros_like(false_counts)
    # thresholds ascend, so both series descend; reverse to trace the curve
    # from (0,0) to (1,1) without reordering tied x-values
    xs = np.concatenate([[0.0], far[::-1], [1.0]])
    ys = np.concatenate([[0.0], recall[::-1], [1.0]])
    auc = float(np.trapezoid(ys, xs))
    return AlarmEval(thresholds, recall, far, auc)


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """ROC AUC as the normalized Mann-Whitney statistic; ties count 1/2."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need at least one positive and one negative label")
    ranks = rankdata(scores)  # average ranks handle ties
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def metric_report(
    mse: SegmentMse | None = None,
    alarm: AlarmEval | None = None,
    roc: float | None = None,
) -> dict:
    """Assemble the JSON-ready evaluation report."""
    report: dict = {}
    if mse is not None:
        report["mse"] = mse.as_dict()
    if alarm is not None:
        report["alarm"] = {
            "auc": alarm.auc,
            "degenerate": alarm.degenerate,
            "matching": alarm.matching,
            "curve": alarm.curve(),
        }
    if roc is not None:
        report["roc_auc"] = roc
    return report
