"""Synthetic source models and block-splice forgeries for desk-scale benchmarks."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate

__all__ = [
    "SourceModel",
    "ForgeryCase",
    "render",
    "make_forgery",
    "DEFAULT_MODELS",
]


@dataclass(frozen=True)
class SourceModel:
    """Procedural stand-in for a camera model.

    An image is a random-direction gradient plus white scene texture whose
    strength is drawn per image from ``texture_sigma``, followed by the
    model's own sensor noise, optional 3x3 blur and quantization.
    """

    id: str
    noise_sigma: float = 2.0
    blur_kernel: tuple[tuple[float, ...], ...] | None = None
    quantization_step: int = 1
    gradient: float = 80.0
    texture_sigma: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.quantization_step < 1:
            raise ValueError("quantization_step must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        lo, hi = self.texture_sigma
        if lo < 0 or hi < lo:
            raise ValueError("texture_sigma must be a range 0 <= lo <= hi")
        if self.blur_kernel is not None and np.shape(self.blur_kernel) != (3, 3):
            raise ValueError("blur_kernel must be 3x3")


_BINOMIAL = ((1 / 16, 2 / 16, 1 / 16), (2 / 16, 4 / 16, 2 / 16), (1 / 16, 2 / 16, 1 / 16))

DEFAULT_MODELS = (
    SourceModel("cam-a", noise_sigma=2.0, texture_sigma=(0.0, 30.0)),
    SourceModel("cam-b", noise_sigma=2.0, blur_kernel=_BINOMIAL, quantization_step=2, texture_sigma=(0.0, 30.0)),
)


def _rng(model_id: str, seed: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, zlib.crc32(model_id.encode("utf-8"))])


def render(model: SourceModel, width: int, height: int, seed: int) -> np.ndarray:
    """Deterministic uint8 image of shape ``(height, width)``."""
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be >= 1")
    rng = _rng(model.id, seed)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    span = max(width, height)
    ramp = (np.cos(angle) * xx + np.sin(angle) * yy) / span
    base = 128.0 + model.gradient * (ramp - ramp.mean())

    lo, hi = model.texture_sigma
    tex = rng.uniform(lo, hi)
    noise = rng.standard_normal((2, height, width))
    img = base + tex * noise[0] + model.noise_sigma * noise[1]

    if model.blur_kernel is not None:
        img = correlate(img, np.asarray(model.blur_kernel, dtype=np.float64), mode="nearest")
    q = model.quantization_step
    img = np.floor(img / q + 0.5) * q
    return np.clip(img, 0, 255).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class ForgeryCase:
    forged_image: np.ndarray
    gt_mask: np.ndarray
    block_size: int
    paste_location: tuple[int, int]
    source_location: tuple[int, int] = field(default=(0, 0))


def make_forgery(host, donor, block: int, seed: int) -> ForgeryCase:
    """Paste a ``block``-sized square from a random donor spot at a random host spot."""
    host = np.asarray(host)
    donor = np.asarray(donor)
    if block < 1:
        raise ValueError(f"block size must be >= 1, got {block}")
    hh, hw = host.shape
    dh, dw = donor.shape
    if block > min(hh, hw):
        raise ValueError(f"block {block} larger than host {hw}x{hh}")
    if block > min(dh, dw):
        raise ValueError(f"block {block} larger than donor {dw}x{dh}")
    rng = np.random.default_rng(int(seed))
    sx = int(rng.integers(0, dw - block + 1))
    sy = int(rng.integers(0, dh - block + 1))
    px = int(rng.integers(0, hw - block + 1))
    py = int(rng.integers(0, hh - block + 1))
    out = host.copy()
    out[py : py + block, px : px + block] = donor[sy : sy + block, sx : sx + block]
    mask = np.zeros(host.shape, dtype=np.uint8)
    mask[py : py + block, px : px + block] = 1
    return ForgeryCase(out, mask, int(block), (px, py), (sx, sy))
