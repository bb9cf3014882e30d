"""Forgery detection and localization with forensic similarity graphs."""

from .estimators import (
    MeanSimilarityDetector,
    MinSimilarityDetector,
    ModularityDetector,
    ModularityPartitioner,
    PatchSimilarityTransformer,
    SpectralGapDetector,
    SpectralPartitioner,
)
from .exceptions import FormatError, NumericalError, UndefinedMetricError
from .graph import SimilarityGraph, build_graph, laplacian
from .localize import PixelMaps, build_pixel_maps, select_alpha, smooth_and_threshold
from .modularity import ModularityResult, detect_modularity, fast_greedy, localize_modularity, modularity_q
from .patching import PatchGeometry, PatchSet, extract_pixels, load_pgm, sample_patches, save_pgm
from .similarity import ResidualSimilarity, compute_matrix, load_matrix, residual_similarity, save_matrix
from .spectral import (
    DetectionResult,
    Partition,
    Spectrum,
    detect_spectral_gap,
    eigh,
    laplacian_spectrum,
    partition_kmeans,
    partition_sign,
)

__version__ = "0.1.0"

__all__ = [
    "DetectionResult",
    "FormatError",
    "MeanSimilarityDetector",
    "MinSimilarityDetector",
    "ModularityDetector",
    "ModularityPartitioner",
    "ModularityResult",
    "NumericalError",
    "Partition",
    "PatchGeometry",
    "PatchSet",
    "PatchSimilarityTransformer",
    "PixelMaps",
    "ResidualSimilarity",
    "SimilarityGraph",
    "SpectralGapDetector",
    "SpectralPartitioner",
    "Spectrum",
    "UndefinedMetricError",
    "build_graph",
    "build_pixel_maps",
    "compute_matrix",
    "detect_modularity",
    "detect_spectral_gap",
    "eigh",
    "extract_pixels",
    "fast_greedy",
    "laplacian",
    "laplacian_spectrum",
    "load_matrix",
    "load_pgm",
    "localize_modularity",
    "modularity_q",
    "partition_kmeans",
    "partition_sign",
    "residual_similarity",
    "sample_patches",
    "save_matrix",
    "save_pgm",
    "select_alpha",
    "smooth_and_threshold",
]
