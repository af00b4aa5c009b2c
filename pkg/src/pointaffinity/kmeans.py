"""k-means++ seeding and Lloyd iterations (squared Euclidean)."""

from __future__ import annotations

import numpy as np

from .data import ClusterModel, Dataset
from .errors import ValidationError
from .sampling import make_rng


def clustering_cost(points: np.ndarray, centers: np.ndarray,
                    labels: np.ndarray | None = None) -> float:
    """Sum of squared distances from each point to its (assigned) center."""
    if labels is None:
        d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        return float(d2.min(axis=1).sum())
    diff = points - centers[labels]
    return float(np.sum(diff * diff))


def kmeanspp_seed(data: Dataset, k: int, rng: np.random.Generator) -> np.ndarray:
    """D^2-weighted seeding; never re-picks an already chosen location."""
    if k > data.n:
        raise ValidationError(f"k={k} exceeds n={data.n}")
    pts = data.points
    centers = np.empty((k, data.d))
    first = int(rng.integers(data.n))
    centers[0] = pts[first]
    d2 = np.sum((pts - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            # all remaining mass sits on chosen locations; pick any new point
            fresh = np.flatnonzero(d2 > 0.0)
            idx = int(fresh[0]) if fresh.size else int(rng.integers(data.n))
        else:
            idx = int(rng.choice(data.n, p=d2 / total))
        centers[j] = pts[idx]
        d2 = np.minimum(d2, np.sum((pts - centers[j]) ** 2, axis=1))
    return centers


def _assign(pts: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    return np.argmin(d2, axis=1)


def lloyd_trace(data: Dataset, centers, max_iters: int = 50):
    """Lloyd iterations returning the fitted model and per-iteration costs.

    Empty clusters are re-seeded from the point farthest from its current
    center, which keeps k centers alive without increasing the cost.
    """
    centers = np.array(centers, dtype=float)
    if centers.ndim != 2 or centers.shape[1] != data.d:
        raise ValidationError("centers must be a (k, d) array")
    pts = data.points
    costs = []
    labels = _assign(pts, centers)
    for _ in range(max_iters):
        costs.append(clustering_cost(pts, centers, labels))
        new_centers = centers.copy()
        for j in range(centers.shape[0]):
            members = pts[labels == j]
            if members.shape[0] > 0:
                new_centers[j] = members.mean(axis=0)
        empties = np.flatnonzero(np.bincount(labels, minlength=centers.shape[0]) == 0)
        if empties.size:
            gaps = np.sum((pts - new_centers[labels]) ** 2, axis=1)
            order = np.argsort(-gaps)
            for rank, j in enumerate(empties):
                new_centers[j] = pts[order[rank % data.n]]
        new_labels = _assign(pts, new_centers)
        moved = float(np.max(np.abs(new_centers - centers)))
        centers, labels = new_centers, new_labels
        if moved == 0.0:
            break
    costs.append(clustering_cost(pts, centers, labels))
    return ClusterModel(centers, labels=labels), costs


def lloyd(data: Dataset, centers, max_iters: int = 50) -> ClusterModel:
    model, _ = lloyd_trace(data, centers, max_iters)
    return model


def kmeans_fit(data: Dataset, k: int, seed: int = 0, max_iters: int = 50) -> ClusterModel:
    """k-means++ seeding followed by Lloyd iterations."""
    rng = make_rng(seed)
    return lloyd(data, kmeanspp_seed(data, k, rng), max_iters)
