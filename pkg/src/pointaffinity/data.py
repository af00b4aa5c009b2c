"""Core value types: point sets, cluster models, partitions, bounding boxes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentSitesError, ValidationError

# Representatives closer than this are considered the same site.
DUPLICATE_TOL = 1e-12


def _finite_matrix(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a 2-d array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite coordinates")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Dataset:
    """An (n, d) point set with finite coordinates."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _finite_matrix(self.points, "points"))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Partition:
    """Cluster labels for n points, each label in [0, k)."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size < 1:
            raise ValidationError("labels must be a non-empty 1-d integer array")
        if self.k < 1:
            raise ValidationError("k must be at least 1")
        if labels.min() < 0 or labels.max() >= self.k:
            raise ValidationError(f"labels must lie in [0, {self.k})")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, labels, k: int | None = None) -> "Partition":
        labels = np.asarray(labels, dtype=np.int64)
        if k is None:
            k = int(labels.max()) + 1 if labels.size else 1
        return cls(labels, k)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def compact(self) -> "Partition":
        """Remap labels onto a dense range, dropping unused indices."""
        used, dense = np.unique(self.labels, return_inverse=True)
        return Partition(dense.astype(np.int64), int(used.size))


@dataclass(frozen=True)
class ClusterModel:
    """k cluster representatives with optional importance weights and labels.

    Weights enter membership comparisons subtractively: a point belongs to
    the site minimizing D(p, c_j) - w_j.
    """

    representatives: np.ndarray
    weights: np.ndarray | None = None
    labels: np.ndarray | None = None

    def __post_init__(self):
        reps = _finite_matrix(self.representatives, "representatives")
        object.__setattr__(self, "representatives", reps)
        k = reps.shape[0]
        # duplicate sites make bisectors degenerate
        for i in range(k - 1):
            gaps = np.linalg.norm(reps[i + 1:] - reps[i], axis=1)
            if np.any(gaps < DUPLICATE_TOL):
                j = i + 1 + int(np.argmin(gaps))
                raise CoincidentSitesError(f"representatives {i} and {j} coincide")
        if self.weights is None:
            w = np.zeros(k)
        else:
            w = np.array(self.weights, dtype=float)
        if w.shape != (k,):
            raise ValidationError(f"weights must have shape ({k},), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights contain non-finite values")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int64)
            if labels.ndim != 1:
                raise ValidationError("labels must be a 1-d integer array")
            if labels.size and (labels.min() < 0 or labels.max() >= k):
                raise ValidationError(f"labels must lie in [0, {k})")
            labels.flags.writeable = False
            object.__setattr__(self, "labels", labels)

    @property
    def k(self) -> int:
        return self.representatives.shape[0]

    @property
    def d(self) -> int:
        return self.representatives.shape[1]

    @classmethod
    def from_labels(cls, data: Dataset, labels, k: int | None = None,
                    weights=None) -> "ClusterModel":
        """Build a model whose representatives are the label-group centroids."""
        part = labels if isinstance(labels, Partition) else Partition.from_labels(labels, k)
        if part.n != data.n:
            raise ValidationError(f"{part.n} labels for {data.n} points")
        sizes = part.sizes()
        if np.any(sizes == 0):
            empty = int(np.flatnonzero(sizes == 0)[0])
            raise ValidationError(f"cluster {empty} has no points; compact the partition first")
        centroids = np.zeros((part.k, data.d))
        np.add.at(centroids, part.labels, data.points)
        centroids /= sizes[:, None]
        return cls(centroids, weights=weights, labels=part.labels)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box [lo, hi] used to keep every influence cell bounded."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float).reshape(-1)
        hi = np.array(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.size < 1:
            raise ValidationError("box bounds must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValidationError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValidationError("box lower bound exceeds upper bound")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_points(cls, points, inflation: float = 1.0) -> "BoundingBox":
        """Bounding box of the points, halfwidths scaled by `inflation` about the center."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo) * inflation
        # axes that are flat (or negligibly thin next to the widest axis) get
        # a unit pad: a collapsed box dimension would trap the sampler
        fallback = max(1.0, float(half.max(initial=0.0)))
        half = np.where(half > 1e-6 * fallback, half, fallback)
        return cls(center - half, center + half)

    @property
    def d(self) -> int:
        return self.lo.shape[0]

    @property
    def span(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, y, tol: float = 1e-9) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.all(y >= self.lo - tol) and np.all(y <= self.hi + tol))
