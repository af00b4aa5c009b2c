"""Dimensionality handling: projection onto the span of the centers and
random Fourier features for RBF-kernelized data.

Squared Euclidean distances split across the center span and its orthogonal
complement, so projecting onto the span preserves every volume ratio the
affinity scores are built from.  Sampling cost then depends on the number
of clusters, not the ambient dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import ClusterModel, Dataset
from .errors import ValidationError
from .sampling import make_rng

RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class SpanProjection:
    """Orthonormal basis of the affine hull of the cluster representatives."""

    mean: np.ndarray
    basis: np.ndarray            # (r, d)
    singular_values: np.ndarray

    @property
    def rank(self) -> int:
        return self.basis.shape[0]


def fit_span_projection(model: ClusterModel) -> SpanProjection:
    """SVD of the centered representatives; keeps directions above the rank cutoff."""
    if model.k < 2:
        raise ValidationError("span projection needs at least 2 representatives")
    mean = model.representatives.mean(axis=0)
    centered = model.representatives - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    if svals[0] <= 0.0:
        raise ValidationError("representatives span nothing; all centers coincide")
    rank = int(np.sum(svals > RANK_CUTOFF * svals[0]))
    return SpanProjection(mean, vt[:rank], svals[:rank])


def apply_projection(proj: SpanProjection, y) -> np.ndarray:
    """Coordinates of y - mean in the span basis; works on vectors or (n, d) arrays."""
    y = np.asarray(y, dtype=float)
    return (y - proj.mean) @ proj.basis.T


def project_model(proj: SpanProjection, model: ClusterModel) -> ClusterModel:
    return replace(model, representatives=apply_projection(proj, model.representatives))


def project_dataset(proj: SpanProjection, data: Dataset) -> Dataset:
    return Dataset(apply_projection(proj, data.points))


@dataclass(frozen=True)
class FourierEmbedding:
    """Random Fourier feature map approximating the RBF kernel.

    Dot products of embedded points approximate exp(-|y - y'|^2 / (2 sigma^2));
    the map is a deterministic function of (seed, sigma, n_features, d).
    """

    frequencies: np.ndarray     # (n_features, d)
    phases: np.ndarray          # (n_features,)
    sigma: float
    seed: int

    @property
    def n_features(self) -> int:
        return self.frequencies.shape[0]


def fit_fourier_embedding(d: int, n_features: int = 500, sigma: float = 1.0,
                          seed: int = 0) -> FourierEmbedding:
    if sigma <= 0.0:
        raise ValidationError("sigma must be positive")
    if n_features < 1:
        raise ValidationError("n_features must be at least 1")
    if d < 1:
        raise ValidationError("d must be at least 1")
    rng = make_rng(seed)
    freqs = rng.standard_normal((n_features, d)) / sigma
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_features)
    return FourierEmbedding(freqs, phases, float(sigma), seed)


def embed(fe: FourierEmbedding, y) -> np.ndarray:
    """Map a vector or (n, d) array into feature space."""
    y = np.asarray(y, dtype=float)
    scale = np.sqrt(2.0 / fe.n_features)
    return scale * np.cos(y @ fe.frequencies.T + fe.phases)
