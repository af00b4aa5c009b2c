"""Synthetic Gaussian-blob generators used by the demos and tests."""

from __future__ import annotations

import numpy as np

from .data import Dataset, Partition
from .sampling import make_rng


def gaussian_blobs(centers, counts, sigma: float = 1.0, seed: int = 0):
    """Isotropic Gaussian clusters around the given centers.

    Returns (Dataset, Partition, centers array); counts may be a scalar or
    one value per center.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    k = centers.shape[0]
    counts = np.broadcast_to(np.asarray(counts, dtype=int), (k,))
    rng = make_rng(seed)
    points = []
    labels = []
    for j in range(k):
        points.append(centers[j] + sigma * rng.standard_normal((counts[j], centers.shape[1])))
        labels.extend([j] * int(counts[j]))
    data = Dataset(np.vstack(points))
    return data, Partition.from_labels(np.array(labels), k), centers


def five_cluster_square(n_per: int = 100, sigma: float = 1.0, spread: float = 10.0,
                        seed: int = 0):
    """Four corner clusters plus one in the middle of a square."""
    s = spread
    centers = np.array([[0.0, 0.0], [s, 0.0], [0.0, s], [s, s], [s / 2, s / 2]])
    return gaussian_blobs(centers, n_per, sigma, seed)


def five_cluster_cube(n_per: int = 100, sigma: float = 1.0, spread: float = 10.0,
                      seed: int = 0):
    """Four alternating cube corners plus the cube center (3D)."""
    s = spread
    centers = np.array([
        [0.0, 0.0, 0.0],
        [s, s, 0.0],
        [s, 0.0, s],
        [0.0, s, s],
        [s / 2, s / 2, s / 2],
    ])
    return gaussian_blobs(centers, n_per, sigma, seed)
