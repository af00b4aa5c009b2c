"""Affinity scoring: build the query cell, sample it, attribute the steals.

A query point is treated as a one-point cluster.  The fraction of its
influence cell stolen from each existing cluster is its affinity vector;
a point is stable when one cluster loses a strict majority of the cell.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cells import COINCIDENT_TOL, build_influence_cell, steal_owners
from .data import BoundingBox, ClusterModel, Dataset
from .errors import MalformedVectorError, ValidationError
from .measures import DistanceMeasure
from .sampling import SamplerConfig, WalkStats, make_rng, mix_seed, sample_polytope

log = logging.getLogger(__name__)

WEIGHTING_MODES = ("none", "cluster-size")


@dataclass(frozen=True)
class AffinityVector:
    """Per-cluster stolen-volume fractions plus the derived stability label.

    `alphas` sums to 1 exactly; at most one entry can exceed 1/2.  `score`
    is 1 for stable points and max(alphas) otherwise.  `clipped` records
    whether the bounding box truncated the influence cell.
    """

    alphas: np.ndarray
    stable: bool
    score: float
    stable_index: int | None
    clipped: bool = False

    def __post_init__(self):
        alphas = np.array(self.alphas, dtype=float)
        alphas.flags.writeable = False
        object.__setattr__(self, "alphas", alphas)

    @property
    def k(self) -> int:
        return self.alphas.shape[0]


def required_samples(epsilon: float, delta: float, k: int) -> int:
    """Samples guaranteeing max_i |estimate_i - alpha_i| <= epsilon w.p. >= 1 - delta.

    Hoeffding bound per cluster plus a union bound over the k counts.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValidationError("epsilon must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValidationError("delta must lie in (0, 1)")
    if k < 1:
        raise ValidationError("k must be at least 1")
    return math.ceil(math.log(2.0 * k / delta) / (2.0 * epsilon * epsilon))


def classify_stability(alphas) -> tuple[bool, float, int | None]:
    """(stable, score, stable_index) for an affinity vector.

    Stable means some entry strictly exceeds 1/2; the scalar score is then 1,
    otherwise the largest entry.
    """
    arr = np.asarray(alphas, dtype=float).reshape(-1)
    if arr.size < 1 or not np.all(np.isfinite(arr)):
        raise MalformedVectorError("affinity vector must be non-empty and finite")
    if arr.min() < -1e-9:
        raise MalformedVectorError("affinity entries must be non-negative")
    if abs(float(arr.sum()) - 1.0) > 1e-9:
        raise MalformedVectorError("affinity entries must sum to 1")
    top = int(np.argmax(arr))
    if arr[top] > 0.5:
        return True, 1.0, top
    return False, float(arr[top]), None


def indicator_affinity(k: int, index: int, clipped: bool = False) -> AffinityVector:
    alphas = np.zeros(k)
    alphas[index] = 1.0
    return AffinityVector(alphas, True, 1.0, index, clipped)


_ALPHA_SCALE = 2 ** 48


def _force_unit_sum(alphas: np.ndarray) -> np.ndarray:
    """Snap fractions to dyadic rationals with denominator 2^48.

    Their partial sums are exact in float64 regardless of summation order,
    so the unit-sum and permutation-equivariance contracts hold bit-for-bit.
    The snap moves each entry by at most 2^-49.
    """
    num = np.rint(alphas * _ALPHA_SCALE).astype(np.int64)
    num[int(np.argmax(num))] += _ALPHA_SCALE - num.sum()
    return num.astype(float) / _ALPHA_SCALE


def _alphas_from_counts(counts: np.ndarray, m: int) -> np.ndarray:
    return _force_unit_sum(counts.astype(float) / m)


def _power_scores(x: np.ndarray, model: ClusterModel, measure: DistanceMeasure) -> np.ndarray:
    """D(x, c_j) - w_j for every site, including the shared generator term."""
    G, c = measure.site_linear_form(model.representatives, model.weights)
    return float(measure.phi(x)) + c - G @ x


def default_box(model: ClusterModel, extra_points, inflation: float) -> BoundingBox:
    pts = np.vstack([model.representatives, np.atleast_2d(extra_points)])
    return BoundingBox.from_points(pts, inflation)


def affinity_point(x, model: ClusterModel, measure: DistanceMeasure,
                   config: SamplerConfig, x_weight: float = 0.0,
                   box: BoundingBox | None = None,
                   rng: np.random.Generator | None = None) -> AffinityVector:
    """Affinity vector of a single query point.

    Coincidence with a representative short-circuits to that cluster's
    indicator vector.  A query whose power cell is empty (possible only
    with weights) is likewise credited entirely to the dominating cluster.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != model.d:
        raise ValidationError(f"query dimension {x.size} != model dimension {model.d}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("query point must be finite")
    measure.check_domain(x)
    gaps = np.linalg.norm(model.representatives - x, axis=1)
    nearest = int(np.argmin(gaps))
    if gaps[nearest] < COINCIDENT_TOL:
        return indicator_affinity(model.k, nearest)
    scores = _power_scores(x, model, measure)
    best = int(np.argmin(scores))
    if scores[best] + x_weight < -COINCIDENT_TOL:
        # the query steals nothing: its weighted cell is empty
        return indicator_affinity(model.k, best)
    if box is None:
        box = default_box(model, x, config.box_inflation)
    cell = build_influence_cell(x, model, measure, box, x_weight=x_weight)
    if rng is None:
        rng = make_rng(config.seed)
    stats = WalkStats()
    samples = sample_polytope(cell, x, config, rng=rng, stats=stats)
    owners = steal_owners(samples, model, measure)
    counts = np.bincount(owners, minlength=model.k)
    alphas = _alphas_from_counts(counts, config.m)
    stable, score, stable_index = classify_stability(alphas)
    return AffinityVector(alphas, stable, score, stable_index,
                          clipped=stats.box_face_hits > 0)


def cluster_size_weights(labels: np.ndarray, k: int, n: int) -> np.ndarray:
    """Importance weights w_j = |C_j| / n."""
    return np.bincount(labels, minlength=k).astype(float) / n


def _score_chunk(points: np.ndarray, indices: np.ndarray, model: ClusterModel,
                 measure: DistanceMeasure, config: SamplerConfig,
                 box: BoundingBox, sizes: np.ndarray | None,
                 n: int) -> list[AffinityVector | None]:
    out: list[AffinityVector | None] = []
    for x, i in zip(points, indices):
        rng = make_rng(mix_seed(config.seed, int(i)))
        if sizes is None:
            point_model, x_weight = model, 0.0
        else:
            w = sizes.copy()
            w[model.labels[i]] -= 1.0
            point_model = replace(model, weights=w / n)
            x_weight = 1.0 / n
        try:
            out.append(affinity_point(x, point_model, measure, config,
                                      x_weight=x_weight, box=box, rng=rng))
        except ValidationError as exc:
            log.warning("point %d failed: %s", i, exc)
            out.append(None)
    return out


def affinity_batch(data: Dataset, model: ClusterModel, measure: DistanceMeasure,
                   config: SamplerConfig, weighting: str = "none",
                   box: BoundingBox | None = None,
                   threads: int = 1) -> list[AffinityVector | None]:
    """Affinity vectors for every dataset point, seeded per index.

    Point i uses the stream mix_seed(config.seed, i), so results do not
    depend on execution order or on the parallel width.  Under cluster-size
    weighting the queried point is removed from its own cluster's count and
    queries carry weight 1/n.  Per-point failures are logged and left as
    None without aborting the batch.  threads > 1 fans chunks out to worker
    processes; the per-point walks are too fine-grained for Python threads.
    """
    if weighting not in WEIGHTING_MODES:
        raise ValidationError(f"weighting must be one of {WEIGHTING_MODES}")
    if data.d != model.d:
        raise ValidationError("data and model dimensions disagree")
    if box is None:
        box = default_box(model, data.points, config.box_inflation)
    sizes = None
    if weighting == "cluster-size":
        if model.labels is None:
            raise ValidationError("cluster-size weighting needs model labels")
        if model.labels.shape[0] != data.n:
            raise ValidationError("model labels do not cover the dataset")
        sizes = np.bincount(model.labels, minlength=model.k).astype(float)
    indices = np.arange(data.n)
    if threads <= 1 or data.n < 2 * threads:
        return _score_chunk(data.points, indices, model, measure, config,
                            box, sizes, data.n)
    results: list[AffinityVector | None] = []
    chunks = np.array_split(indices, 4 * threads)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_score_chunk, data.points[c], c, model, measure,
                               config, box, sizes, data.n)
                   for c in chunks if c.size]
        for fut in futures:
            results.extend(fut.result())
    return results
