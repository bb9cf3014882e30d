"""Patch partitions to pixel maps and binary forgery masks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .patching import PatchSet
from .spectral import Partition

__all__ = [
    "PixelMaps",
    "build_pixel_maps",
    "select_alpha",
    "gaussian_kernel",
    "smooth",
    "smooth_and_threshold",
    "to_gray8",
    "mask_to_gray8",
]


@dataclass(frozen=True, eq=False)
class PixelMaps:
    """Per-pixel maps with image shape ``(height, width)``.

    ``P`` counts covering patches assigned to community ``alpha``, ``T``
    counts all covering patches, and ``P_norm = P / T`` (0 where ``T == 0``).
    """

    P: np.ndarray
    T: np.ndarray
    P_norm: np.ndarray
    alpha: int


def _rasterize(shape: tuple[int, int], patches: PatchSet, keep: np.ndarray) -> np.ndarray:
    # 2-D difference array: +1 at each rectangle corner pair, then cumulative sums
    h, w = shape
    acc = np.zeros((h + 1, w + 1), dtype=np.int64)
    for g, k in zip(patches, keep):
        if not k:
            continue
        acc[g.y0, g.x0] += 1
        acc[g.y0, g.x0 + g.size] -= 1
        acc[g.y0 + g.size, g.x0] -= 1
        acc[g.y0 + g.size, g.x0 + g.size] += 1
    return np.cumsum(np.cumsum(acc, axis=0), axis=1)[:h, :w]


def build_pixel_maps(patches: PatchSet, partition: Partition | np.ndarray, alpha: int) -> PixelMaps:
    labels = partition.labels if isinstance(partition, Partition) else np.asarray(partition)
    if labels.shape != (len(patches),):
        raise ValueError(f"need one label per patch ({len(patches)}), got shape {labels.shape}")
    shape = (patches.image_height, patches.image_width)
    T = _rasterize(shape, patches, np.ones(len(patches), dtype=bool))
    P = _rasterize(shape, patches, labels == alpha)
    P_norm = np.zeros(shape)
    covered = T > 0
    P_norm[covered] = P[covered] / T[covered]
    return PixelMaps(P, T, P_norm, int(alpha))


def select_alpha(partition: Partition | np.ndarray) -> int:
    """Smaller of the two communities (label 2 on a tie)."""
    labels = partition.labels if isinstance(partition, Partition) else np.asarray(partition)
    k = partition.k if isinstance(partition, Partition) else int(labels.max(initial=0))
    if k != 2:
        raise ValueError(f"automatic alpha needs exactly 2 communities, got k={k}; pass alpha explicitly")
    n1 = int(np.count_nonzero(labels == 1))
    n2 = int(np.count_nonzero(labels == 2))
    return 1 if n1 < n2 else 2


def gaussian_kernel(window: int, sigma: float | None = None) -> np.ndarray:
    """Normalized 1-D Gaussian of odd length (even windows grow by one).

    ``sigma`` defaults to ``window / 6`` of the requested window.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if sigma is None:
        sigma = window / 6.0
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if window % 2 == 0:
        window += 1
    r = window // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / sigma) ** 2)
    return g / g.sum()


def smooth(values: np.ndarray, window: int = 32, sigma: float | None = None) -> np.ndarray:
    """Separable Gaussian blur with kernel mass renormalized over in-image pixels."""
    values = np.asarray(values, dtype=np.float64)
    g = gaussian_kernel(window, sigma)
    if g.size > values.shape[0] or g.size > values.shape[1]:
        raise ValueError(f"smoothing window {g.size} larger than image {values.shape[1]}x{values.shape[0]}")
    ones = np.ones_like(values)
    num = values
    den = ones
    for axis in (0, 1):
        num = correlate1d(num, g, axis=axis, mode="constant", cval=0.0)
        den = correlate1d(den, g, axis=axis, mode="constant", cval=0.0)
    out = num / den
    # keep within the input range despite rounding
    return np.clip(out, values.min(), values.max())


def smooth_and_threshold(
    maps: PixelMaps | np.ndarray,
    window: int = 32,
    sigma: float | None = None,
    thresh: float = 0.25,
) -> np.ndarray:
    """Binary mask (uint8 0/1) where the smoothed normalized map is ``>= thresh``.

    Uncovered pixels (``T == 0``) are always 0.
    """
    if isinstance(maps, PixelMaps):
        pn, covered = maps.P_norm, maps.T > 0
    else:
        pn = np.asarray(maps, dtype=np.float64)
        covered = np.ones(pn.shape, dtype=bool)
    sm = smooth(pn, window, sigma)
    return ((sm >= thresh) & covered).astype(np.uint8)


def to_gray8(values: np.ndarray) -> np.ndarray:
    """Scale [0, 1] values to 0..255 with round-half-up."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def mask_to_gray8(mask: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(mask) > 0, 255, 0).astype(np.uint8)
