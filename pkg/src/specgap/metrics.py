"""Ground-truth eigendecomposition and convergence/clustering metrics."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Graph, dense_laplacian

__all__ = [
    "GroundTruth",
    "dense_eig",
    "graph_ground_truth",
    "subspace_error",
    "eigenvector_streak",
    "eigengaps",
    "kmeans_cluster",
    "cluster_accuracy",
]

_SYMMETRY_TOL = 1e-8
_DEGENERACY_TOL = 1e-8


@dataclass
class GroundTruth:
    """Full spectrum of a symmetric matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, orthonormal, aligned with eigenvalues

    def bottom(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, :k]


def dense_eig(mat: np.ndarray) -> GroundTruth:
    """Dense symmetric eigendecomposition with eigenvalues in ascending order."""
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    if mat.shape[0] > 5000:
        raise ValueError("dense eigendecomposition refused above n=5000")
    scale = max(1.0, float(np.abs(mat).max()) if mat.size else 1.0)
    if float(np.abs(mat - mat.T).max()) > _SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    vals, vecs = np.linalg.eigh(mat)
    return GroundTruth(vals, vecs)


def graph_ground_truth(g: Graph, mode: str = "unnormalized") -> GroundTruth:
    return dense_eig(dense_laplacian(g, mode))


def subspace_error(V: np.ndarray, gt: GroundTruth, k: int | None = None) -> float:
    """Normalized projector misalignment ``1 - tr(U* P) / k``.

    ``P = V (V^T V)^{-1} V^T`` is the orthogonal projector onto the span of
    the candidate columns and ``U*`` projects onto the bottom-k ground-truth
    eigenvectors.  0 means the spans coincide, 1 means they are orthogonal.
    """
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    if V.ndim != 2:
        raise ValueError("V must be an n x k matrix")
    kk = V.shape[1] if k is None else k
    if np.any(np.linalg.norm(V, axis=0) == 0):
        raise ValueError("V has a zero column")
    gram = V.T @ V
    star = gt.bottom(kk)
    B = star.T @ V  # k x k
    try:
        sol = np.linalg.solve(gram, B.T)
    except np.linalg.LinAlgError:
        warnings.warn("singular Gram matrix in subspace_error; regularizing")
        sol = np.linalg.solve(gram + 1e-12 * np.eye(gram.shape[0]), B.T)
    trace = float(np.einsum("ij,ji->", B, sol))  # tr(B G^{-1} B^T)
    return float(np.clip(1.0 - trace / kk, 0.0, 1.0))


def _eigenspace_slices(eigenvalues: np.ndarray, tol: float = _DEGENERACY_TOL):
    """Group indices of (sorted) eigenvalues that coincide within ``tol``."""
    groups = []
    start = 0
    for i in range(1, len(eigenvalues) + 1):
        if i == len(eigenvalues) or eigenvalues[i] - eigenvalues[start] > tol:
            groups.append(slice(start, i))
            start = i
    return groups


def eigenvector_streak(V: np.ndarray, gt: GroundTruth, epsilon: float = 0.01,
                       strict: bool = False) -> int:
    """Length of the initial run of columns aligned with their eigenspaces.

    Column ``i`` counts as converged when the norm of its projection onto the
    ground-truth eigenspace of the i-th smallest eigenvalue is at least
    ``1 - epsilon`` (columns are normalized first).  Degenerate eigenvalues
    share one eigenspace, so any unit vector inside a multiplicity-d space is
    aligned for each of its d positions.  ``strict=True`` instead compares
    against the single i-th eigenvector (paper-literal cosine mode).
    """
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    k = V.shape[1]
    norms = np.linalg.norm(V, axis=0)
    if np.any(norms == 0):
        return 0
    Vn = V / norms
    vals = gt.eigenvalues
    if strict:
        spaces = [slice(i, i + 1) for i in range(k)]
    else:
        groups = _eigenspace_slices(vals)
        spaces = []
        for grp in groups:
            spaces.extend([grp] * (grp.stop - grp.start))
        spaces = spaces[:k]
    streak = 0
    for i in range(k):
        basis = gt.eigenvectors[:, spaces[i]]
        align = float(np.linalg.norm(basis.T @ Vn[:, i]))
        if align >= 1.0 - epsilon:
            streak += 1
        else:
            break
    return streak


def eigengaps(gt: GroundTruth) -> list[tuple[float, float]]:
    """Consecutive gaps ``lambda_{i+1} - lambda_i`` and ratios ``lambda_n / g_i``."""
    vals = gt.eigenvalues
    top = float(vals[-1])
    out = []
    for i in range(len(vals) - 1):
        gap = float(vals[i + 1] - vals[i])
        out.append((gap, top / gap if gap > 0 else np.inf))
    return out


def kmeans_cluster(X: np.ndarray, k: int, seed: int = 0,
                   max_iter: int = 100) -> np.ndarray:
    """Lloyd's algorithm with farthest-point initialization.

    The first centroid is a seeded random row; each further centroid is the
    point farthest from all chosen so far.  Empty clusters are reseeded from
    the farthest point.  Returns one label per row.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    npts = X.shape[0]
    rng = np.random.default_rng(seed)
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(npts)]
    dist = np.linalg.norm(X - centers[0], axis=1)
    for j in range(1, k):
        centers[j] = X[int(np.argmax(dist))]
        dist = np.minimum(dist, np.linalg.norm(X - centers[j], axis=1))
    labels = np.zeros(npts, dtype=np.int64)
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        for j in range(k):
            members = X[new_labels == j]
            if members.shape[0] == 0:
                nearest = d2[np.arange(npts), new_labels]
                centers[j] = X[int(np.argmax(nearest))]
            else:
                centers[j] = members.mean(axis=0)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels


def cluster_accuracy(labels: np.ndarray, truth: np.ndarray) -> float:
    """Best label-permutation match fraction (exhaustive for k <= 8)."""
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    if labels.shape != truth.shape:
        raise ValueError("label arrays must have equal length")
    ids = np.unique(np.concatenate([labels, truth]))
    if ids.size > 8:
        raise ValueError("permutation matching supported for at most 8 clusters")
    best = 0.0
    for perm in itertools.permutations(ids):
        mapping = dict(zip(ids, perm))
        remapped = np.array([mapping[x] for x in labels])
        best = max(best, float(np.mean(remapped == truth)))
    return best
