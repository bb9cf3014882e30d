"""Grayscale image I/O and regular patch sampling."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .exceptions import FormatError

__all__ = [
    "PatchGeometry",
    "PatchSet",
    "check_image",
    "load_pgm",
    "save_pgm",
    "sample_patches",
    "extract_pixels",
    "stride_for",
]


class PatchGeometry(NamedTuple):
    x0: int
    y0: int
    size: int

    def fits(self, width: int, height: int) -> bool:
        return (
            self.size >= 1
            and self.x0 >= 0
            and self.y0 >= 0
            and self.x0 + self.size <= width
            and self.y0 + self.size <= height
        )


@dataclass(frozen=True)
class PatchSet:
    """Ordered patch geometries; list position is the graph vertex index."""

    geometries: tuple[PatchGeometry, ...]
    image_width: int
    image_height: int
    patch_size: int
    overlap: float
    stride: int = field(default=0)

    def __len__(self) -> int:
        return len(self.geometries)

    def __iter__(self) -> Iterator[PatchGeometry]:
        return iter(self.geometries)

    def __getitem__(self, i: int) -> PatchGeometry:
        return self.geometries[i]

    def centers(self) -> np.ndarray:
        """(n, 2) array of patch centers as (x, y)."""
        g = np.array(self.geometries, dtype=float).reshape(-1, 3)
        return g[:, :2] + g[:, 2:3] / 2.0

    def to_tsv(self) -> str:
        return "".join(f"{i}\t{g.x0}\t{g.y0}\t{g.size}\n" for i, g in enumerate(self.geometries))


def check_image(img) -> np.ndarray:
    """Validate a grayscale image and return it as a 2-D uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D grayscale image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.floating) and not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("image values must lie in [0, 255]")
        if not np.all(arr == np.round(arr)):
            raise ValueError("image values must be integral")
        arr = arr.astype(np.uint8)
    return arr


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def load_pgm(path: str | os.PathLike) -> np.ndarray:
    """Read a binary (P5) PGM with maxval <= 255.

    Returns
    -------
    ndarray of uint8, shape (height, width)
    """
    with open(path, "rb") as fh:
        data = fh.read()

    magic, pos = _read_token(data, 0)
    if magic != b"P5":
        raise FormatError(f"unsupported magic {magic!r} (only binary PGM 'P5' is read)")
    fields = {}
    for name in ("width", "height", "maxval"):
        tok, pos = _read_token(data, pos)
        try:
            fields[name] = int(tok)
        except ValueError:
            raise FormatError(f"malformed header field {name}: {tok!r}") from None
        if fields[name] < 1:
            raise FormatError(f"malformed header field {name}: {fields[name]}")
    if fields["maxval"] > 255:
        raise FormatError(f"unsupported maxval {fields['maxval']} (must be <= 255)")
    # exactly one whitespace byte separates the header from the raster
    pos += 1
    w, h = fields["width"], fields["height"]
    payload = data[pos : pos + w * h]
    if len(payload) < w * h:
        raise FormatError(f"truncated payload: expected {w * h} bytes, got {len(payload)}")
    img = np.frombuffer(payload, dtype=np.uint8).reshape(h, w).copy()
    if img.max(initial=0) > fields["maxval"]:
        raise FormatError(f"pixel value exceeds maxval {fields['maxval']}")
    return img


def save_pgm(path: str | os.PathLike, img) -> None:
    arr = check_image(img)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(arr).tobytes())


def stride_for(patch_size: int, overlap: float) -> int:
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"overlap must be in [0, 1), got {overlap}")
    # round half up; Python's round() is banker's rounding
    return max(1, int(np.floor(patch_size * (1.0 - overlap) + 0.5)))


def sample_patches(img, patch_size: int = 128, overlap: float = 0.5) -> PatchSet:
    """Regular grid of square patches, row-major by (y0, x0).

    Patch starts are multiples of the stride; pixels in a right/bottom
    remainder narrower than a stride are left uncovered.
    """
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D image")
    height, width = arr.shape
    if patch_size < 1:
        raise ValueError(f"patch_size must be >= 1, got {patch_size}")
    if patch_size > min(width, height):
        raise ValueError(f"patch_size {patch_size} exceeds image size {width}x{height}")
    stride = stride_for(patch_size, overlap)
    xs = range(0, width - patch_size + 1, stride)
    ys = range(0, height - patch_size + 1, stride)
    geoms = tuple(PatchGeometry(x, y, patch_size) for y in ys for x in xs)
    return PatchSet(geoms, width, height, patch_size, float(overlap), stride)


def extract_pixels(img, g: PatchGeometry) -> np.ndarray:
    arr = np.asarray(img)
    height, width = arr.shape
    if not g.fits(width, height):
        raise ValueError(f"patch {tuple(g)} does not fit in a {width}x{height} image")
    return arr[g.y0 : g.y0 + g.size, g.x0 : g.x0 + g.size].copy()
