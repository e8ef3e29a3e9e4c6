"""Clustering of learned embeddings and agreement metrics.

The experiment pipeline clusters the columns of the coefficient matrix
with k-means (Lloyd's algorithm, k-means++ seeding, several restarts)
and scores the result against ground truth with normalized mutual
information and best-assignment accuracy, plus the relative
reconstruction error of the factorization itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .linalg import as_matrix

__all__ = [
    "ClusteringResult",
    "MetricReport",
    "kmeans",
    "nmi",
    "acc",
    "relative_error",
]

_MAX_LABEL_KINDS = 64


@dataclass(frozen=True)
class ClusteringResult:
    """Outcome of one k-means call (the best restart).

    Attributes:
        labels: cluster index per point, length n.
        centroids: clusters x d matrix of cluster centers.
        inertia: sum of squared distances of points to their centroid.
        n_iter: Lloyd iterations the winning restart took.
    """

    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int


@dataclass(frozen=True)
class MetricReport:
    """Scores for one factorization run.

    ``nmi`` and ``acc`` are ``None`` when no ground-truth labels were
    available; they are never fabricated.
    """

    relative_error: float
    nmi: float | None = None
    acc: float | None = None

    def to_dict(self) -> dict:
        d = {"relative_error": self.relative_error}
        if self.nmi is not None:
            d["nmi"] = self.nmi
        if self.acc is not None:
            d["acc"] = self.acc
        return d


def _plus_plus_seeding(points: np.ndarray, clusters: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ center selection: spread the initial centers out."""
    n = points.shape[0]
    centers = np.empty((clusters, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    closest_sq = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, clusters):
        total = float(closest_sq.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=closest_sq / total))
        else:
            # All remaining points coincide with a chosen center.
            idx = int(rng.integers(n))
        centers[c] = points[idx]
        closest_sq = np.minimum(closest_sq, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int = 300):
    """Lloyd iterations from given centers.

    Returns (labels, centers, inertia, n_iter, inertia_history); the
    history holds the post-assignment inertia of every pass, which is
    nonincreasing -- a property the tests pin down.
    """
    n = points.shape[0]
    clusters = centers.shape[0]
    labels = np.full(n, -1)
    history: list[float] = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        # Squared distances to each center; argmin breaks ties toward
        # the lower center index.
        d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(n), new_labels].sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(clusters):
            members = points[labels == c]
            if len(members) > 0:
                centers[c] = members.mean(axis=0)
            else:
                # Re-seed an empty cluster at the point farthest from
                # its current center (deterministic argmax).
                worst = int(np.argmax(d2[np.arange(n), labels]))
                centers[c] = points[worst]
    inertia = history[-1]
    return labels, centers, inertia, n_iter, history


def kmeans(points: np.ndarray, clusters: int, seed: int = 0, restarts: int = 10) -> ClusteringResult:
    """Cluster the rows of ``points`` into ``clusters`` groups.

    Runs ``restarts`` independent k-means++/Lloyd attempts from one
    seeded generator and keeps the lowest-inertia result (ties keep the
    earliest restart), so the outcome is deterministic per seed.
    """
    points = as_matrix(points)
    n = points.shape[0]
    if not 1 <= clusters <= n:
        raise ValueError(f"clusters={clusters} must lie in [1, n_points={n}]")
    if restarts < 1:
        raise ValueError(f"restarts must be positive, got {restarts}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        centers = _plus_plus_seeding(points, clusters, rng)
        labels, centers, inertia, n_iter, _ = _lloyd(points, centers)
        if best is None or inertia < best.inertia:
            best = ClusteringResult(
                labels=labels, centroids=centers, inertia=inertia, n_iter=n_iter
            )
    return best


def _contingency(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Joint count table over the distinct values of two label vectors."""
    _, a_idx = np.unique(a, return_inverse=True)
    _, b_idx = np.unique(b, return_inverse=True)
    table = np.zeros((a_idx.max() + 1, b_idx.max() + 1), dtype=np.int64)
    np.add.at(table, (a_idx, b_idx), 1)
    return table


def _as_label_vector(labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("labels must be a nonempty 1-D sequence")
    return arr


def _check_same_length(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"label vectors differ in length: {a.shape[0]} vs {b.shape[0]}")


def nmi(labels_a, labels_b) -> float:
    """Normalized mutual information, ``2 I(A,B) / (H(A) + H(B))``.

    Entropies use natural logs (the base cancels) with the usual
    ``0 log 0 = 0`` convention.  Two single-cluster labelings carry no
    information yet agree perfectly, so that degenerate case returns 1.
    """
    a = _as_label_vector(labels_a)
    b = _as_label_vector(labels_b)
    _check_same_length(a, b)
    n = a.shape[0]
    table = _contingency(a, b)
    joint = table / n
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)

    nz = joint > 0
    mutual = float(np.sum(joint[nz] * np.log(joint[nz] / np.outer(pa, pb)[nz])))
    ent_a = float(-np.sum(pa[pa > 0] * np.log(pa[pa > 0])))
    ent_b = float(-np.sum(pb[pb > 0] * np.log(pb[pb > 0])))
    if ent_a + ent_b == 0.0:
        return 1.0
    return float(np.clip(2.0 * mutual / (ent_a + ent_b), 0.0, 1.0))


def acc(labels_pred, labels_true) -> float:
    """Clustering accuracy under the best cluster-to-class matching.

    The matching is the optimal assignment on the contingency table
    (Hungarian method), so the score is invariant to how either side
    happens to number its groups.
    """
    pred = _as_label_vector(labels_pred)
    true = _as_label_vector(labels_true)
    _check_same_length(pred, true)
    table = _contingency(pred, true)
    if table.shape[0] > _MAX_LABEL_KINDS or table.shape[1] > _MAX_LABEL_KINDS:
        raise ValueError(
            f"too many distinct labels ({table.shape}); at most {_MAX_LABEL_KINDS} per side"
        )
    rows, cols = linear_sum_assignment(-table)
    return float(table[rows, cols].sum()) / pred.shape[0]


def relative_error(x: np.ndarray, w: np.ndarray, h: np.ndarray) -> float:
    """Factorization quality: ``||x - w h||_F / ||x||_F``."""
    x = as_matrix(x)
    denom = float(np.linalg.norm(x))
    if denom == 0.0:
        raise ValueError("relative error undefined for an all-zero data matrix")
    return float(np.linalg.norm(x - w @ h)) / denom
