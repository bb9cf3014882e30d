"""scikit-learn compatible estimators over forensic similarity matrices.

Detectors take ``X`` as a sequence of square similarity matrices (one per
image, sizes may differ) and predict 1 for forged, 0 for unaltered.
Partitioners take a single similarity matrix and label its vertices.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .graph import build_graph
from .metrics import POLARITY
from .modularity import fast_greedy, localize_modularity
from .pipeline import DEFAULT_TAU, detection_statistic, similarity_matrix
from .similarity import ResidualSimilarity, check_similarity_matrix
from .spectral import laplacian_spectrum, partition_kmeans, partition_sign

__all__ = [
    "check_matrices",
    "PatchSimilarityTransformer",
    "SpectralGapDetector",
    "ModularityDetector",
    "MeanSimilarityDetector",
    "MinSimilarityDetector",
    "SpectralPartitioner",
    "ModularityPartitioner",
]


def check_matrices(X) -> list[np.ndarray]:
    """Validate a batch of similarity matrices.

    Accepts a 3-D array ``(n_images, n, n)`` or any sequence of 2-D arrays.
    """
    if isinstance(X, np.ndarray) and X.ndim == 2:
        raise ValueError("expected a batch of similarity matrices; wrap a single matrix in a list")
    mats = [check_similarity_matrix(S) for S in X]
    if not mats:
        raise ValueError("empty batch")
    return mats


class PatchSimilarityTransformer(TransformerMixin, BaseEstimator):
    """Images -> forensic similarity matrices (stateless)."""

    def __init__(self, patch_size=128, overlap=0.5, gamma=1.0):
        self.patch_size = patch_size
        self.overlap = overlap
        self.gamma = gamma

    def fit(self, X, y=None):
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        provider = ResidualSimilarity(self.gamma)
        return [similarity_matrix(img, self.patch_size, self.overlap, provider)[1] for img in X]


class _StatisticDetector(ClassifierMixin, BaseEstimator):
    method: str = ""

    def _statistics(self, X) -> np.ndarray:
        return np.array([self._statistic(S) for S in check_matrices(X)])

    def _statistic(self, S) -> float:
        return detection_statistic(S, self.method)

    def fit(self, X, y=None):
        """Fix the decision threshold.

        With ``tau=None`` and labels given, the threshold maximizing balanced
        accuracy on ``X`` is chosen; without labels the default operating
        point is used.
        """
        self.classes_ = np.array([0, 1])
        if self.tau is not None:
            self.tau_ = float(self.tau)
        elif y is None:
            self.tau_ = DEFAULT_TAU[self.method]
        else:
            self.tau_ = self._calibrate(self._statistics(X), np.asarray(y).astype(bool))
        return self

    def _calibrate(self, stats: np.ndarray, y: np.ndarray) -> float:
        if y.all() or not y.any():
            raise ValueError("calibration needs both forged and unaltered examples")
        pol = POLARITY[self.method]
        best, best_tau = -1.0, DEFAULT_TAU[self.method]
        for tau in np.unique(stats):
            pred = stats >= tau if pol > 0 else stats < tau
            bacc = 0.5 * (np.mean(pred[y]) + np.mean(~pred[~y]))
            if bacc > best:
                best, best_tau = bacc, float(tau)
        return best_tau

    def score_samples(self, X) -> np.ndarray:
        """Raw detection statistic per image."""
        return self._statistics(X)

    def decision_function(self, X) -> np.ndarray:
        """Statistic oriented so that larger values mean forged."""
        return POLARITY[self.method] * self._statistics(X)

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "tau_")
        stats = self._statistics(X)
        forged = stats >= self.tau_ if POLARITY[self.method] > 0 else stats < self.tau_
        return forged.astype(int)


class SpectralGapDetector(_StatisticDetector):
    """Flags an image as forged when the Laplacian's second eigenvalue is below ``tau``."""

    method = "spectral-gap"

    def __init__(self, tau=None, threshold=0.0, laplacian="unnormalized", eigensolver="auto"):
        self.tau = tau
        self.threshold = threshold
        self.laplacian = laplacian
        self.eigensolver = eigensolver

    def _statistic(self, S) -> float:
        return detection_statistic(S, self.method, self.threshold, self.laplacian, self.eigensolver)


class ModularityDetector(_StatisticDetector):
    """Flags an image as forged when fast-greedy modularity reaches ``tau``."""

    method = "modularity"

    def __init__(self, tau=None, threshold=0.0):
        self.tau = tau
        self.threshold = threshold

    def _statistic(self, S) -> float:
        return detection_statistic(S, self.method, self.threshold)


class MeanSimilarityDetector(_StatisticDetector):
    method = "mean-sim"

    def __init__(self, tau=None):
        self.tau = tau


class MinSimilarityDetector(_StatisticDetector):
    method = "min-sim"

    def __init__(self, tau=None):
        self.tau = tau


class SpectralPartitioner(ClusterMixin, BaseEstimator):
    """Sign split of the Fiedler vector (k=2) or k-means on the first k eigenvectors."""

    def __init__(self, n_clusters=2, normalized=False, threshold=0.0, random_state=0, eigensolver="auto"):
        self.n_clusters = n_clusters
        self.normalized = normalized
        self.threshold = threshold
        self.random_state = random_state
        self.eigensolver = eigensolver

    def fit(self, X, y=None):
        G = build_graph(X, self.threshold)
        kind = "normalized" if self.normalized else "unnormalized"
        spec = laplacian_spectrum(G, kind, self.eigensolver)
        if self.n_clusters == 2:
            part = partition_sign(spec)
        else:
            part = partition_kmeans(spec, self.n_clusters, self.random_state or 0)
        self.spectrum_ = spec
        self.partition_ = part
        self.labels_ = part.labels
        self.lambda2_ = spec.fiedler_value
        return self


class ModularityPartitioner(ClusterMixin, BaseEstimator):
    """Fast-greedy dendrogram cut at ``n_clusters`` communities (``None`` = best Q)."""

    def __init__(self, n_clusters=2, threshold=0.7):
        self.n_clusters = n_clusters
        self.threshold = threshold

    def fit(self, X, y=None):
        G = build_graph(X, self.threshold)
        res = fast_greedy(G)
        part = res.partition if self.n_clusters is None else localize_modularity(G, self.n_clusters, res)
        self.result_ = res
        self.partition_ = part
        self.labels_ = part.labels
        self.q_opt_ = res.q_opt
        return self
