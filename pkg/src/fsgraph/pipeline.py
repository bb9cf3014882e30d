"""End-to-end detection and localization on images or similarity matrices."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericalError
from .graph import SimilarityGraph, build_graph
from .localize import PixelMaps, build_pixel_maps, select_alpha, smooth, smooth_and_threshold
from .metrics import POLARITY, mean_similarity, min_similarity
from .modularity import fast_greedy, localize_modularity
from .patching import PatchSet, check_image, extract_pixels, sample_patches
from .similarity import ResidualSimilarity, check_similarity_matrix, compute_matrix
from .spectral import DetectionResult, Partition, laplacian_spectrum, partition_kmeans, partition_sign

__all__ = [
    "DETECTION_METHODS",
    "LOCALIZATION_METHODS",
    "DEFAULT_TAU",
    "similarity_matrix",
    "detection_statistic",
    "decide",
    "detect",
    "localize",
    "LocalizationResult",
]

DETECTION_METHODS = ("spectral-gap", "modularity", "mean-sim", "min-sim")
LOCALIZATION_METHODS = ("spectral", "normed-spectral", "modularity-loc")

# spectral-gap and modularity values follow the example scores reported for
# 1080p images; the similarity baselines have no published operating point
DEFAULT_TAU = {"spectral-gap": 100.0, "modularity": 0.025, "mean-sim": 0.5, "min-sim": 0.5}


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0


def similarity_matrix(img, patch_size: int = 128, overlap: float = 0.5, provider=None):
    """Sample patches and score all pairs.

    Returns ``(patches, S, timings)`` where timings has ``features_ms`` and
    ``graph_ms`` entries.
    """
    img = check_image(img)
    provider = ResidualSimilarity() if provider is None else provider
    patches = sample_patches(img, patch_size, overlap)
    if len(patches) < 2:
        raise ValueError(f"only {len(patches)} patch fits; need at least 2 for a graph")
    t0 = time.perf_counter()
    if hasattr(provider, "features") and hasattr(provider, "similarity_from_features"):
        F = provider.features([extract_pixels(img, g) for g in patches])
        t_feat = _ms(t0)
        t1 = time.perf_counter()
        S = check_similarity_matrix(provider.similarity_from_features(F))
        t_graph = _ms(t1)
    else:
        S = compute_matrix(patches, img, provider)
        t_feat, t_graph = 0.0, _ms(t0)
    return patches, S, {"features_ms": t_feat, "graph_ms": t_graph}


def detection_statistic(S, method: str, t: float = 0.0, laplacian_kind: str = "unnormalized", eigensolver: str = "auto") -> float:
    """Scalar statistic for one detection method on a similarity matrix."""
    if method == "mean-sim":
        return mean_similarity(check_similarity_matrix(S))
    if method == "min-sim":
        return min_similarity(check_similarity_matrix(S))
    G = S if isinstance(S, SimilarityGraph) else build_graph(S, t)
    if method == "spectral-gap":
        return laplacian_spectrum(G, laplacian_kind, eigensolver).fiedler_value
    if method == "modularity":
        try:
            return fast_greedy(G).q_opt
        except NumericalError:
            # no edges survive the threshold: no community structure to measure
            return 0.0
    raise ValueError(f"unknown detection method {method!r}; expected one of {DETECTION_METHODS}")


def decide(statistic: float, method: str, tau: float) -> DetectionResult:
    forged = statistic >= tau if POLARITY[method] > 0 else statistic < tau
    return DetectionResult(float(statistic), method, "Forged" if forged else "Unaltered", float(tau))


def detect(S, method: str = "spectral-gap", tau: float | None = None, t: float = 0.0, **kw) -> DetectionResult:
    tau = DEFAULT_TAU[method] if tau is None else tau
    return decide(detection_statistic(S, method, t, **kw), method, tau)


@dataclass(eq=False)
class LocalizationResult:
    partition: Partition
    maps: dict[int, PixelMaps]
    smoothed: dict[int, np.ndarray]
    masks: dict[int, np.ndarray]
    alphas: list[int] = field(default_factory=list)


def partition_graph(G: SimilarityGraph, method: str = "spectral", k: int = 2, seed: int = 0, eigensolver: str = "auto") -> Partition:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > G.n:
        raise ValueError(f"k={k} exceeds the number of patches ({G.n})")
    if method in ("spectral", "normed-spectral"):
        kind = "normalized" if method == "normed-spectral" else "unnormalized"
        spec = laplacian_spectrum(G, kind, eigensolver)
        return partition_sign(spec) if k == 2 else partition_kmeans(spec, k, seed)
    if method == "modularity-loc":
        return localize_modularity(G, k)
    raise ValueError(f"unknown localization method {method!r}; expected one of {LOCALIZATION_METHODS}")


def localize(
    S,
    patches: PatchSet,
    method: str = "spectral",
    t: float | None = None,
    k: int = 2,
    alpha: int | str | None = None,
    window: int = 32,
    sigma: float | None = None,
    thresh: float = 0.25,
    seed: int = 0,
    eigensolver: str = "auto",
) -> LocalizationResult:
    """Partition the graph and convert the chosen communities to pixel masks.

    ``alpha=None`` picks the smaller community (k=2 only); ``"all"`` produces
    one map and mask per community.
    """
    if t is None:
        t = 0.7 if method == "modularity-loc" else 0.0
    G = build_graph(S, t)
    if G.n != len(patches):
        raise ValueError(f"matrix has {G.n} vertices but there are {len(patches)} patches")
    part = partition_graph(G, method, k, seed, eigensolver)
    if alpha is None or alpha == "auto":
        alphas = [select_alpha(part)]
    elif alpha == "all":
        alphas = list(range(1, part.k + 1))
    else:
        alphas = [int(alpha)]
        if not 1 <= alphas[0] <= part.k:
            raise ValueError(f"alpha must be in 1..{part.k}, got {alpha}")
    maps, smoothed, masks = {}, {}, {}
    for a in alphas:
        pm = build_pixel_maps(patches, part, a)
        maps[a] = pm
        smoothed[a] = smooth(pm.P_norm, window, sigma)
        masks[a] = smooth_and_threshold(pm, window, sigma, thresh)
    return LocalizationResult(part, maps, smoothed, masks, alphas)
