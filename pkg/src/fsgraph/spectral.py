"""Symmetric eigensolver and spectral forgery detection / partitioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError
from .graph import SimilarityGraph, laplacian

__all__ = [
    "Spectrum",
    "DetectionResult",
    "Partition",
    "jacobi_eigh",
    "eigh",
    "laplacian_spectrum",
    "detect_spectral_gap",
    "partition_sign",
    "partition_kmeans",
    "relabel_first_occurrence",
    "JACOBI_MAX_N",
]

SYMMETRY_TOL = 1e-9
# Beyond this size the LAPACK solver is used (see eigh).
JACOBI_MAX_N = 200


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def fiedler_value(self) -> float:
        return float(self.eigenvalues[1])

    @property
    def fiedler_vector(self) -> np.ndarray:
        return self.eigenvectors[:, 1]

    def to_text(self) -> str:
        return "".join(
            f"lambda_{i + 1}\t{format(v, '.17g')}\n" for i, v in enumerate(self.eigenvalues)
        )


@dataclass(frozen=True)
class DetectionResult:
    statistic: float
    method: str
    decision: str
    tau: float

    @property
    def forged(self) -> bool:
        return self.decision == "Forged"


@dataclass(frozen=True, eq=False)
class Partition:
    """Community labels ``1..k`` per vertex and the associated quality score."""

    labels: np.ndarray
    k: int
    score: float

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k + 1)[1:]

    def to_tsv(self) -> str:
        return "".join(f"{i}\t{c}\n" for i, c in enumerate(self.labels))


def _check_symmetric(L) -> np.ndarray:
    A = np.array(L, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite values")
    asym = np.max(np.abs(A - A.T), initial=0.0)
    if asym > SYMMETRY_TOL:
        raise ValueError(f"matrix is not symmetric (max |A - A^T| = {asym:.3g})")
    return (A + A.T) / 2.0


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pair schedule covering every (p, q) once per sweep in n-1 rounds of disjoint pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _canonicalize_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry is positive (lowest index on ties)."""
    if V.size == 0:
        return V
    mag = np.abs(V)
    peak = mag.max(axis=0)
    # near-equal magnitudes count as ties so the choice is stable under rounding
    idx = np.argmax(mag >= peak * (1.0 - 1e-10), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def jacobi_eigh(L, tol: float = 1e-12, max_sweeps: int = 100) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Each sweep visits every off-diagonal pair once using a round-robin
    ordering, so the rotations within a round act on disjoint index pairs
    and are applied together. Iteration stops when the largest off-diagonal
    magnitude is at most ``tol * ||L||_F``.
    """
    A = _check_symmetric(L)
    n = A.shape[0]
    V = np.eye(n)
    fro = np.linalg.norm(A)
    bound = tol * fro
    rounds = _round_robin(n) if n > 1 else []
    off_mask = ~np.eye(n, dtype=bool)

    sweeps = 0
    while True:
        off = np.max(np.abs(A[off_mask]), initial=0.0)
        if off <= bound:
            break
        if sweeps >= max_sweeps:
            raise NumericalError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(residual max off-diagonal {off:.3g}, target {bound:.3g})"
            )
        for p, q in rounds:
            apq = A[p, q]
            active = np.abs(apq) > 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = A[p, p], A[q, q]
            with np.errstate(over="ignore"):
                theta = (aqq - app) / (2.0 * apq)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            Ap, Aq = A[:, p], A[:, q]
            A[:, p] = c * Ap - s * Aq
            A[:, q] = s * Ap + c * Aq
            Ap, Aq = A[p, :], A[q, :]
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[p, q] = 0.0
            A[q, p] = 0.0

            Vp, Vq = V[:, p], V[:, q]
            V[:, p] = c * Vp - s * Vq
            V[:, q] = s * Vp + c * Vq
        sweeps += 1

    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order], _canonicalize_signs(V[:, order]), sweeps)


def eigh(L, method: str = "auto") -> Spectrum:
    """Eigendecomposition with ascending eigenvalues and sign-canonical vectors.

    ``method`` is ``"jacobi"``, ``"lapack"`` (``numpy.linalg.eigh``) or
    ``"auto"``, which uses Jacobi up to ``JACOBI_MAX_N`` vertices.
    """
    A = _check_symmetric(L)
    if method == "auto":
        method = "jacobi" if A.shape[0] <= JACOBI_MAX_N else "lapack"
    if method == "jacobi":
        return jacobi_eigh(A)
    if method == "lapack":
        w, V = np.linalg.eigh(A)
        order = np.argsort(w, kind="stable")
        return Spectrum(w[order], _canonicalize_signs(V[:, order]))
    raise ValueError(f"unknown eigensolver {method!r}")


def _align_null_space(spec: Spectrum, trivial: np.ndarray, rtol: float = 1e-9) -> Spectrum:
    """Within a degenerate bottom eigenspace, make the first vector the projection of ``trivial``.

    For a disconnected graph any basis of the zero eigenspace is valid; this
    choice puts the constant (or ``sqrt(d)``) direction first so the second
    vector is orthogonal to it and splits the vertices by sign.
    """
    w, V = spec.eigenvalues, spec.eigenvectors
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    r = int(np.count_nonzero(w - w[0] <= rtol * scale))
    if r < 2:
        return spec
    B = V[:, :r]
    coef = B.T @ trivial
    if np.linalg.norm(coef) == 0.0:
        return spec
    u1 = B @ coef
    u1 /= np.linalg.norm(u1)
    rest = B - np.outer(u1, u1 @ B)
    U, _, _ = np.linalg.svd(rest, full_matrices=False)
    new = V.copy()
    new[:, 0] = u1
    new[:, 1:r] = U[:, : r - 1]
    new = _canonicalize_signs(new)
    return Spectrum(w, new, spec.sweeps)


def laplacian_spectrum(G: SimilarityGraph, kind: str = "unnormalized", method: str = "auto") -> Spectrum:
    """Spectrum of the graph Laplacian with a deterministic null-space basis."""
    spec = eigh(laplacian(G, kind), method=method)
    trivial = np.ones(G.n) if kind == "unnormalized" else np.sqrt(G.degrees)
    return _align_null_space(spec, trivial)


def detect_spectral_gap(spec: Spectrum, tau: float) -> DetectionResult:
    """Unaltered when the second-smallest eigenvalue is at least ``tau``."""
    if spec.n < 2:
        raise ValueError("need at least 2 eigenvalues")
    lam2 = spec.fiedler_value
    decision = "Unaltered" if lam2 >= tau else "Forged"
    return DetectionResult(lam2, "spectral-gap", decision, float(tau))


def partition_sign(spec: Spectrum) -> Partition:
    if spec.n < 2:
        raise ValueError("need at least 2 vertices")
    u2 = spec.fiedler_vector
    labels = np.where(u2 >= 0.0, 1, 2)
    return Partition(labels, 2, spec.fiedler_value)


def relabel_first_occurrence(labels) -> np.ndarray:
    """Map arbitrary labels to ``1..k`` in order of first appearance."""
    labels = np.asarray(labels)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.intp)
    rank[np.argsort(first, kind="stable")] = np.arange(1, first.size + 1)
    return rank[inverse.reshape(-1)]


def _kmeans(X: np.ndarray, k: int, start: int, max_iter: int = 300) -> np.ndarray:
    n = X.shape[0]
    centers_idx = [start]
    dmin = np.sum((X - X[start]) ** 2, axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(dmin))
        centers_idx.append(nxt)
        dmin = np.minimum(dmin, np.sum((X - X[nxt]) ** 2, axis=1))
    centers = X[centers_idx].copy()

    assign = np.full(n, -1)
    for _ in range(max_iter):
        d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new = np.argmin(d2, axis=1)
        if np.array_equal(new, assign):
            break
        assign = new
        for c in range(k):
            members = assign == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
    return assign


def partition_kmeans(spec: Spectrum, k: int = 2, seed: int = 0) -> Partition:
    """k-means on the rows of the first ``k`` eigenvectors.

    Centers start from vertex ``seed mod n`` and grow by farthest-point
    selection, so the result is deterministic.
    """
    n = spec.n
    if not 2 <= k <= n:
        raise ValueError(f"k must satisfy 2 <= k <= n={n}, got {k}")
    X = spec.eigenvectors[:, :k]
    assign = _kmeans(X, k, int(seed) % n)
    labels = relabel_first_occurrence(assign)
    return Partition(labels, int(labels.max()), float(spec.eigenvalues[1]))
