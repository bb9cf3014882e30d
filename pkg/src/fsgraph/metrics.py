"""Detection and localization scoring, and the similarity baselines."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import UndefinedMetricError
from .graph import SimilarityGraph

__all__ = [
    "ConfusionCounts",
    "confusion",
    "mcc",
    "f1",
    "mean_similarity",
    "min_similarity",
    "orient",
    "roc_curve",
    "roc_auc",
    "mean_average_precision",
    "pd_at_pfa",
    "threshold_per_image",
    "threshold_per_database",
    "POLARITY",
]

# +1: larger statistic means forged; -1: larger means unaltered
POLARITY = {
    "spectral-gap": -1,
    "modularity": +1,
    "mean-sim": -1,
    "min-sim": -1,
}


def _offdiag(S) -> np.ndarray:
    S = S.W if isinstance(S, SimilarityGraph) else np.asarray(S, dtype=np.float64)
    n = S.shape[0]
    if n < 2:
        raise ValueError("need at least 2 vertices")
    return S[np.triu_indices(n, 1)]


def mean_similarity(S) -> float:
    """Mean of the unordered-pair similarities (pass the unthresholded matrix)."""
    return float(np.mean(_offdiag(S)))


def min_similarity(S) -> float:
    return float(np.min(_offdiag(S)))


@dataclass(frozen=True)
class ConfusionCounts:
    TP: int
    FP: int
    TN: int
    FN: int

    def __post_init__(self):
        if min(self.TP, self.FP, self.TN, self.FN) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.TP + self.FP + self.TN + self.FN


def confusion(pred, truth) -> ConfusionCounts:
    p = np.asarray(pred).astype(bool).ravel()
    t = np.asarray(truth).astype(bool).ravel()
    if p.shape != t.shape:
        raise ValueError("prediction and ground truth differ in size")
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    return ConfusionCounts(tp, fp, p.size - tp - fp - fn, fn)


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation coefficient; 0 when any marginal is empty."""
    factors = [c.TP + c.FP, c.TP + c.FN, c.TN + c.FP, c.TN + c.FN]
    if 0 in factors:
        return 0.0
    # float product avoids integer overflow on megapixel databases
    den = np.sqrt(float(factors[0]) * factors[1] * factors[2] * factors[3])
    return float((float(c.TP) * c.TN - float(c.FP) * c.FN) / den)


def f1(c: ConfusionCounts) -> float:
    if c.TP == 0:
        return 0.0
    precision = c.TP / (c.TP + c.FP)
    recall = c.TP / (c.TP + c.FN)
    return 2.0 * precision * recall / (precision + recall)


def orient(scores, polarity: int | str = 1) -> np.ndarray:
    """Scores oriented so that larger means forged."""
    if isinstance(polarity, str):
        polarity = POLARITY[polarity]
    if polarity not in (1, -1):
        raise ValueError("polarity must be +1 or -1")
    return polarity * np.asarray(scores, dtype=np.float64).ravel()


def _split(scores, labels, polarity):
    s = orient(scores, polarity)
    y = np.asarray(labels).astype(bool).ravel()
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    return s, y


def roc_curve(scores, labels, polarity: int | str = 1) -> tuple[np.ndarray, np.ndarray]:
    """ROC points ``(pfa, pd)`` from a descending sweep; tied scores move together.

    The first point is the origin and the last is (1, 1).
    """
    s, y = _split(scores, labels, polarity)
    npos = int(np.count_nonzero(y))
    nneg = y.size - npos
    if npos == 0 or nneg == 0:
        raise UndefinedMetricError("ROC needs at least one positive and one negative sample")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    tp = np.cumsum(y)
    fp = np.cumsum(~y)
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    pd = np.r_[0.0, tp[ends] / npos]
    pfa = np.r_[0.0, fp[ends] / nneg]
    return pfa, pd


def roc_auc(scores, labels, polarity: int | str = 1) -> float:
    pfa, pd = roc_curve(scores, labels, polarity)
    return float(np.sum(np.diff(pfa) * (pd[1:] + pd[:-1]) / 2.0))


def pd_at_pfa(scores, labels, pfa: float, polarity: int | str = 1) -> float:
    """Largest detection rate over ROC points with false-alarm rate <= ``pfa``."""
    fa, pd = roc_curve(scores, labels, polarity)
    return float(pd[fa <= pfa + 1e-12].max())


def mean_average_precision(scores, labels, polarity: int | str = 1) -> float:
    """Average precision over the descending ranking (stable order on ties)."""
    s, y = _split(scores, labels, polarity)
    if not y.any():
        raise UndefinedMetricError("average precision needs at least one positive")
    order = np.argsort(-s, kind="stable")
    hits = y[order]
    ranks = np.flatnonzero(hits) + 1
    precision = np.arange(1, ranks.size + 1) / ranks
    return float(precision.mean())


Metric = Callable[[ConfusionCounts], float]


def _metric_grid(maps, truths, thresholds, metric: Metric) -> np.ndarray:
    if len(maps) == 0:
        raise ValueError("empty database")
    if len(maps) != len(truths):
        raise ValueError("need one ground-truth mask per score map")
    th = np.asarray(thresholds, dtype=np.float64).ravel()
    if th.size == 0:
        raise ValueError("no candidate thresholds")
    out = np.empty((len(maps), th.size))
    for i, (m, t) in enumerate(zip(maps, truths)):
        m = np.asarray(m, dtype=np.float64)
        for j, thr in enumerate(th):
            out[i, j] = metric(confusion(m >= thr, t))
    return out


def threshold_per_image(
    maps: Sequence[np.ndarray],
    truths: Sequence[np.ndarray],
    metric: Metric = mcc,
    thresholds=None,
) -> tuple[float, np.ndarray]:
    """Mean metric when each image gets its own best threshold.

    Returns the mean and the per-image chosen thresholds.
    """
    th = np.linspace(0.0, 1.0, 101) if thresholds is None else np.asarray(thresholds, dtype=float)
    grid = _metric_grid(maps, truths, th, metric)
    best = np.argmax(grid, axis=1)
    return float(grid[np.arange(len(grid)), best].mean()), th[best]


def threshold_per_database(
    maps: Sequence[np.ndarray],
    truths: Sequence[np.ndarray],
    metric: Metric = mcc,
    thresholds=None,
) -> tuple[float, float]:
    """Best mean metric over one shared threshold; returns (mean, threshold)."""
    th = np.linspace(0.0, 1.0, 101) if thresholds is None else np.asarray(thresholds, dtype=float)
    grid = _metric_grid(maps, truths, th, metric)
    means = grid.mean(axis=0)
    j = int(np.argmax(means))
    return float(means[j]), float(th[j])
