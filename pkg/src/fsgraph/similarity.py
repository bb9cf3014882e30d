"""Pairwise forensic similarity between patches.

The built-in :class:`ResidualSimilarity` is a deterministic stand-in for a
learned similarity network: it compares simple statistics of a high-pass
residual. Any object with a ``score(a, b) -> float`` method can be used as
a provider; providers that also define ``pairwise(blocks)`` get a
vectorized path in :func:`compute_matrix`.
"""

from __future__ import annotations

import os
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .exceptions import FormatError
from .patching import PatchSet, extract_pixels

__all__ = [
    "SimilarityProvider",
    "ResidualSimilarity",
    "residual_features",
    "residual_similarity",
    "compute_matrix",
    "check_similarity_matrix",
    "save_matrix",
    "load_matrix",
    "format_matrix",
    "parse_matrix",
]

SYMMETRY_TOL = 1e-9


@runtime_checkable
class SimilarityProvider(Protocol):
    def score(self, a: np.ndarray, b: np.ndarray) -> float: ...


def _laplacian_residual(block: np.ndarray) -> np.ndarray:
    x = np.asarray(block, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square 2-D patch, got shape {x.shape}")
    if x.shape[0] < 3:
        raise ValueError("patch must be at least 3x3 to have an interior residual")
    # kernel [[0,-1,0],[-1,4,-1],[0,-1,0]] on interior pixels
    return (
        4.0 * x[1:-1, 1:-1]
        - x[:-2, 1:-1]
        - x[2:, 1:-1]
        - x[1:-1, :-2]
        - x[1:-1, 2:]
    )


def residual_features(block: np.ndarray) -> np.ndarray:
    """Feature vector (mean, std, mean |r|, lag-1 horizontal autocorrelation)."""
    r = _laplacian_residual(block)
    mu = r.mean()
    c = r - mu
    var_sum = float(np.sum(c * c))
    std = np.sqrt(var_sum / r.size)
    autocorr = float(np.sum(c[:, :-1] * c[:, 1:]) / var_sum) if var_sum > 0.0 else 0.0
    return np.array([mu, std, np.abs(r).mean(), autocorr])


def residual_similarity(a: np.ndarray, b: np.ndarray, gamma: float = 1.0) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"patches differ in size: {a.shape} vs {b.shape}")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    d = residual_features(a) - residual_features(b)
    return float(np.exp(-gamma * float(d @ d)))


class ResidualSimilarity:
    """Residual-statistics similarity ``exp(-gamma * ||f_a - f_b||^2)``."""

    def __init__(self, gamma: float = 1.0):
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        self.gamma = gamma

    def __repr__(self) -> str:
        return f"ResidualSimilarity(gamma={self.gamma!r})"

    def score(self, a: np.ndarray, b: np.ndarray) -> float:
        return residual_similarity(a, b, self.gamma)

    def features(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        return np.array([residual_features(b) for b in blocks]).reshape(len(blocks), 4)

    def pairwise(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        shapes = {np.shape(b) for b in blocks}
        if len(shapes) > 1:
            raise ValueError(f"patches differ in size: {sorted(shapes)}")
        return self.similarity_from_features(self.features(blocks))

    def similarity_from_features(self, f: np.ndarray) -> np.ndarray:
        diff = f[:, None, :] - f[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        s = np.exp(-self.gamma * d2)
        np.fill_diagonal(s, 0.0)
        return s


def compute_matrix(patches: PatchSet, img, provider=None) -> np.ndarray:
    """Forensic similarity matrix over all unordered patch pairs.

    Diagonal is zero. With a provider lacking ``pairwise`` the scorer is
    called exactly ``n(n-1)/2`` times.
    """
    if provider is None:
        provider = ResidualSimilarity()
    n = len(patches)
    if n < 2:
        raise ValueError(f"need at least 2 patches, got {n}")
    blocks = [extract_pixels(img, g) for g in patches]

    pairwise = getattr(provider, "pairwise", None)
    if callable(pairwise):
        s = np.array(pairwise(blocks), dtype=np.float64)
        if s.shape != (n, n):
            raise ValueError(f"provider returned shape {s.shape}, expected {(n, n)}")
        s = (s + s.T) / 2.0
    else:
        s = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                try:
                    v = float(provider.score(blocks[i], blocks[j]))
                except Exception as exc:
                    raise RuntimeError(f"similarity provider failed on pair ({i}, {j})") from exc
                s[i, j] = s[j, i] = v
    np.fill_diagonal(s, 0.0)
    if not np.all(np.isfinite(s)) or s.min() < 0.0 or s.max() > 1.0:
        raise ValueError("provider produced scores outside [0, 1]")
    return s


def check_similarity_matrix(s, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate a similarity matrix; return a symmetric float copy with zero diagonal."""
    s = np.array(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"similarity matrix must be square, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        i, j = np.argwhere(~np.isfinite(s))[0]
        raise ValueError(f"non-finite value at ({i}, {j})")
    off = ~np.eye(s.shape[0], dtype=bool)
    bad = off & ((s < 0.0) | (s > 1.0))
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(f"value {float(s[i, j])!r} at ({i}, {j}) outside [0, 1]")
    asym = np.abs(s - s.T)
    if asym.max(initial=0.0) > tol:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise ValueError(f"matrix not symmetric at ({i}, {j}): {float(s[i, j])!r} vs {float(s[j, i])!r}")
    s = (s + s.T) / 2.0
    np.fill_diagonal(s, 0.0)
    return s


def format_matrix(s) -> str:
    s = np.asarray(s, dtype=np.float64)
    n = s.shape[0]
    rows = [" ".join(format(v, ".17g") for v in row) for row in s]
    return f"FSM {n}\n" + "\n".join(rows) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "FSM":
        raise FormatError(f"bad header {lines[0]!r}, expected 'FSM <n>'")
    try:
        n = int(head[1])
    except ValueError:
        raise FormatError(f"bad dimension in header: {head[1]!r}") from None
    if n < 1:
        raise FormatError(f"bad dimension in header: {n}")
    if len(lines) - 1 != n:
        raise FormatError(f"dimension mismatch: header says {n} rows, found {len(lines) - 1}")
    s = np.empty((n, n))
    for i, ln in enumerate(lines[1:]):
        toks = ln.split()
        if len(toks) != n:
            raise FormatError(f"dimension mismatch: row {i} has {len(toks)} values, expected {n}")
        try:
            s[i] = [float(t) for t in toks]
        except ValueError:
            raise FormatError(f"non-numeric value in row {i}") from None
    try:
        return check_similarity_matrix(s)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def save_matrix(path: str | os.PathLike, s) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_matrix(s))


def load_matrix(path: str | os.PathLike) -> np.ndarray:
    with open(path, encoding="ascii") as fh:
        return parse_matrix(fh.read())
