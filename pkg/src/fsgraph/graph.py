"""Forensic similarity graph: thresholded edge weights and Laplacians."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .similarity import check_similarity_matrix

__all__ = ["SimilarityGraph", "build_graph", "laplacian", "edge_list_tsv"]


@dataclass(frozen=True, eq=False)
class SimilarityGraph:
    """Dense weighted graph over patches.

    Attributes
    ----------
    W : ndarray (n, n)
        Symmetric edge weights, zero diagonal, each entry 0 or in [t, 1].
    t : float
        Edge threshold used to build ``W``.
    degrees : ndarray (n,)
        Weighted degrees ``W.sum(axis=1)``.
    m : float
        Total edge weight, half the degree sum.
    """

    W: np.ndarray
    t: float
    degrees: np.ndarray
    m: float

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @classmethod
    def from_weights(cls, W, t: float = 0.0) -> "SimilarityGraph":
        W = np.array(W, dtype=np.float64)
        W.setflags(write=False)
        d = W.sum(axis=1)
        d.setflags(write=False)
        return cls(W, float(t), d, float(d.sum() / 2.0))

    def edge_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.W, 1)))


def build_graph(S, t: float = 0.0) -> SimilarityGraph:
    """Keep similarities ``>= t`` as edge weights, zero the rest."""
    if not 0.0 <= t < 1.0:
        raise ValueError(f"edge threshold t must be in [0, 1), got {t}")
    S = check_similarity_matrix(S)
    if S.shape[0] < 2:
        raise ValueError("graph needs at least 2 vertices")
    W = np.where(S >= t, S, 0.0)
    return SimilarityGraph.from_weights(W, t)


def laplacian(G: SimilarityGraph, kind: str = "unnormalized") -> np.ndarray:
    """``D - W``, or ``D^-1/2 (D - W) D^-1/2`` for ``kind="normalized"``.

    Rows and columns of zero-degree vertices are zero in the normalized form.
    """
    L = np.diag(G.degrees) - G.W
    if kind == "unnormalized":
        return L
    if kind != "normalized":
        raise ValueError(f"unknown Laplacian kind {kind!r}")
    d = G.degrees
    inv_sqrt = np.zeros_like(d)
    pos = d > 0
    inv_sqrt[pos] = 1.0 / np.sqrt(d[pos])
    Ln = L * inv_sqrt[:, None] * inv_sqrt[None, :]
    return (Ln + Ln.T) / 2.0


def edge_list_tsv(G: SimilarityGraph) -> str:
    i, j = np.nonzero(np.triu(G.W, 1))
    return "".join(f"{a}\t{b}\t{format(G.W[a, b], '.17g')}\n" for a, b in zip(i, j))
