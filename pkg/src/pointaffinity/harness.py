"""Case-study pipelines built on the scoring engine: affinity-guided active
clustering, consensus validation, and incremental clustering, plus the Rand
distance they are measured with."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .data import ClusterModel, Dataset, Partition
from .errors import ValidationError
from .exact import exact_affinity_2d
from .kmeans import kmeanspp_seed, lloyd
from .measures import squared_euclidean
from .sampling import SamplerConfig, make_rng, mix_seed
from .scores import affinity_batch, default_box


def rand_distance(p1: Partition, p2: Partition) -> float:
    """Fraction of point pairs the two partitions disagree on.

    A pair disagrees when it is co-clustered in exactly one partition.
    Computed from the contingency table, so it is exact pair counting.
    """
    if p1.n != p2.n:
        raise ValidationError(f"partition sizes differ: {p1.n} vs {p2.n}")
    n = p1.n
    if n < 2:
        return 0.0
    joint = np.zeros((p1.k, p2.k), dtype=np.int64)
    np.add.at(joint, (p1.labels, p2.labels), 1)

    def same_pairs(counts):
        return float(np.sum(counts * (counts - 1))) / 2.0

    both = same_pairs(joint)
    s1 = same_pairs(joint.sum(axis=1))
    s2 = same_pairs(joint.sum(axis=0))
    disagree = s1 + s2 - 2.0 * both
    return disagree / (n * (n - 1) / 2.0)


def align_labels(reference: Partition, other: Partition) -> np.ndarray:
    """Relabel `other` to best match `reference` (Hungarian on the overlap table)."""
    if reference.n != other.n:
        raise ValidationError("partitions must cover the same points")
    k = max(reference.k, other.k)
    overlap = np.zeros((k, k), dtype=np.int64)
    np.add.at(overlap, (other.labels, reference.labels), 1)
    rows, cols = linear_sum_assignment(-overlap)
    mapping = np.arange(k)
    mapping[rows] = cols
    return mapping[other.labels]


def majority_vote(partitions: list[Partition]) -> Partition:
    """Plumbing consensus: align label spaces to the first partition, then
    take the per-point majority (ties break toward the lowest label)."""
    if not partitions:
        raise ValidationError("need at least one partition")
    ref = partitions[0]
    aligned = [ref.labels]
    aligned.extend(align_labels(ref, p) for p in partitions[1:])
    stacked = np.stack(aligned)
    k = int(stacked.max()) + 1
    votes = np.zeros((ref.n, k), dtype=np.int64)
    for row in stacked:
        np.add.at(votes, (np.arange(ref.n), row), 1)
    return Partition.from_labels(np.argmax(votes, axis=1), k).compact()


def unstable_fraction(data: Dataset, partition: Partition, config: SamplerConfig,
                      exact: bool = False) -> float:
    """Share of points classified unstable under the centroid model."""
    model = ClusterModel.from_labels(data, partition)
    if exact:
        if data.d != 2:
            raise ValidationError("exact stability audit needs 2D data")
        box = default_box(model, data.points, config.box_inflation)
        flags = [exact_affinity_2d(x, model, box).stable for x in data.points]
    else:
        results = affinity_batch(data, model, squared_euclidean(), config)
        flags = [r is not None and r.stable for r in results]
    return 1.0 - float(np.mean(flags))


@dataclass(frozen=True)
class ConsensusReport:
    """Stability audit of a consensus against its base partitions."""

    base_unstable_pct: tuple[float, ...]
    consensus_unstable_pct: float
    base_rand_to_reference: tuple[float, ...]
    consensus_rand_to_reference: float

    def rows(self) -> list[tuple[str, float]]:
        out = []
        for i, v in enumerate(self.base_unstable_pct):
            out.append((f"base_{i}_unstable_pct", v))
        out.append(("consensus_unstable_pct", self.consensus_unstable_pct))
        for i, v in enumerate(self.base_rand_to_reference):
            out.append((f"base_{i}_rand_to_reference", v))
        out.append(("consensus_rand_to_reference", self.consensus_rand_to_reference))
        return out


def consensus_report(base_partitions: list[Partition], consensus: Partition,
                     reference: Partition, data: Dataset, config: SamplerConfig,
                     exact: bool = False) -> ConsensusReport:
    """Percent-unstable per base partition and for the consensus, plus Rand
    distances to the reference partition."""
    base_pct = tuple(100.0 * unstable_fraction(data, p, config, exact)
                     for p in base_partitions)
    cons_pct = 100.0 * unstable_fraction(data, consensus, config, exact)
    base_rand = tuple(rand_distance(p, reference) for p in base_partitions)
    cons_rand = rand_distance(consensus, reference)
    return ConsensusReport(base_pct, cons_pct, base_rand, cons_rand)


def active_sample_sizes(n: int, alpha: float) -> tuple[int, int]:
    """Requested (stable, unstable) draw sizes: ceil(2 a sqrt n) and ceil(2 (1-a) sqrt n)."""
    root = math.sqrt(n)
    return math.ceil(2.0 * alpha * root), math.ceil(2.0 * (1.0 - alpha) * root)


@dataclass(frozen=True)
class ActiveRun:
    """Outcome of one affinity-guided clustering run."""

    model: ClusterModel
    n_stable: int
    n_unstable: int
    drawn_stable: int
    drawn_unstable: int
    shortfall_stable: int
    shortfall_unstable: int

    def rows(self) -> list[tuple[str, float]]:
        return [
            ("n_stable", self.n_stable),
            ("n_unstable", self.n_unstable),
            ("drawn_stable", self.drawn_stable),
            ("drawn_unstable", self.drawn_unstable),
            ("shortfall_stable", self.shortfall_stable),
            ("shortfall_unstable", self.shortfall_unstable),
        ]


def active_cluster(data: Dataset, k: int, alpha: float, config: SamplerConfig,
                   rng: np.random.Generator, max_iters: int = 50) -> ActiveRun:
    """Cluster a small affinity-guided sample, then assign everyone to it.

    Scores all points against k-means++ seeds, draws the prescribed numbers
    of stable and unstable points (uniformly, without replacement; a short
    pool is topped up from the other pool and recorded), runs Lloyd on the
    sample, and labels the full dataset by nearest center.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")
    seeds = kmeanspp_seed(data, k, rng)
    seed_model = ClusterModel(seeds)
    results = affinity_batch(data, seed_model, squared_euclidean(), config)
    stable_mask = np.array([r is not None and r.stable for r in results])
    stable_idx = np.flatnonzero(stable_mask)
    unstable_idx = np.flatnonzero(~stable_mask)
    want_s, want_u = active_sample_sizes(data.n, alpha)
    take_s = min(want_s, stable_idx.size)
    take_u = min(want_u, unstable_idx.size)
    extra_u = min(want_s - take_s, unstable_idx.size - take_u)
    extra_s = min(want_u - take_u, stable_idx.size - take_s)
    chosen_s = rng.choice(stable_idx, size=take_s + extra_s, replace=False) \
        if stable_idx.size else np.zeros(0, dtype=np.int64)
    chosen_u = rng.choice(unstable_idx, size=take_u + extra_u, replace=False) \
        if unstable_idx.size else np.zeros(0, dtype=np.int64)
    chosen = np.concatenate([chosen_s, chosen_u])
    if chosen.size < k:
        raise ValidationError("sample smaller than k; lower k or raise n")
    sample = Dataset(data.points[np.sort(chosen)])
    sample_model = lloyd(sample, kmeanspp_seed(sample, k, rng), max_iters)
    d2 = np.sum((data.points[:, None, :] - sample_model.representatives[None]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    final = ClusterModel(sample_model.representatives, labels=labels)
    return ActiveRun(final, int(stable_idx.size), int(unstable_idx.size),
                     int(chosen_s.size), int(chosen_u.size),
                     shortfall_stable=want_s - take_s,
                     shortfall_unstable=want_u - take_u)


@dataclass(frozen=True)
class BatchReport:
    batch: int
    n_batch: int
    n_scored: int
    folded_first_pass: int
    folded_second_pass: int
    pool_size: int

    def rows(self) -> list[tuple[str, float]]:
        return [
            (f"batch_{self.batch}_points", self.n_batch),
            (f"batch_{self.batch}_scored", self.n_scored),
            (f"batch_{self.batch}_folded", self.folded_first_pass + self.folded_second_pass),
            (f"batch_{self.batch}_pool", self.pool_size),
        ]


@dataclass(frozen=True)
class IncrementalState:
    """Running clustering summary: centers, how many stable points each has
    absorbed, and the pool of unstable points awaiting more evidence."""

    centers: np.ndarray
    folded_counts: np.ndarray
    pool: np.ndarray
    pool_scores: np.ndarray
    batch_index: int
    reports: tuple[BatchReport, ...] = ()

    @property
    def total_seen(self) -> int:
        return int(self.folded_counts.sum()) + self.pool.shape[0]


def _fold_stable(centers: np.ndarray, counts: np.ndarray, points: np.ndarray,
                 owners: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    centers = centers.copy()
    counts = counts.copy()
    for j in range(centers.shape[0]):
        mine = points[owners == j]
        if mine.shape[0] == 0:
            continue
        total = counts[j] + mine.shape[0]
        centers[j] = (centers[j] * counts[j] + mine.sum(axis=0)) / total
        counts[j] = total
    return centers, counts


def incremental_init(batch: Dataset, k: int, config: SamplerConfig,
                     seed: int = 0, max_iters: int = 50) -> IncrementalState:
    """Seed the stream state: Lloyd on the first batch, then score it."""
    rng = make_rng(seed)
    model = lloyd(batch, kmeanspp_seed(batch, k, rng), max_iters)
    state = IncrementalState(
        centers=model.representatives.copy(),
        folded_counts=np.zeros(k, dtype=np.int64),
        pool=np.zeros((0, batch.d)),
        pool_scores=np.zeros(0),
        batch_index=0,
    )
    return incremental_update(state, batch, config)


def incremental_update(state: IncrementalState, batch: Dataset,
                       config: SamplerConfig) -> IncrementalState:
    """Score batch plus pool against the current centers, fold the stable
    points into their owners by running mean, then re-score the survivors
    once against the updated centers."""
    if batch.d != state.centers.shape[1]:
        raise ValidationError("batch dimension does not match the stream state")
    pts = np.vstack([state.pool, batch.points]) if state.pool.size else batch.points
    model = ClusterModel(state.centers)
    cfg = replace(config, seed=mix_seed(config.seed, 2 * state.batch_index))
    results = affinity_batch(Dataset(pts), model, squared_euclidean(), cfg)
    stable = np.array([r is not None and r.stable for r in results])
    owners = np.array([r.stable_index if (r is not None and r.stable) else -1
                       for r in results])
    centers, counts = _fold_stable(state.centers, state.folded_counts,
                                   pts[stable], owners[stable])
    survivors = pts[~stable]
    folded_second = 0
    pool_scores = np.zeros(0)
    if survivors.shape[0]:
        cfg2 = replace(config, seed=mix_seed(config.seed, 2 * state.batch_index + 1))
        again = affinity_batch(Dataset(survivors), ClusterModel(centers),
                               squared_euclidean(), cfg2)
        stable2 = np.array([r is not None and r.stable for r in again])
        owners2 = np.array([r.stable_index if (r is not None and r.stable) else -1
                            for r in again])
        centers, counts = _fold_stable(centers, counts,
                                       survivors[stable2], owners2[stable2])
        folded_second = int(stable2.sum())
        survivors = survivors[~stable2]
        pool_scores = np.array([r.score for r, s in zip(again, stable2) if not s])
    report = BatchReport(
        batch=state.batch_index + 1,
        n_batch=batch.n,
        n_scored=pts.shape[0],
        folded_first_pass=int(stable.sum()),
        folded_second_pass=folded_second,
        pool_size=survivors.shape[0],
    )
    return IncrementalState(
        centers=centers,
        folded_counts=counts,
        pool=survivors,
        pool_scores=pool_scores,
        batch_index=state.batch_index + 1,
        reports=state.reports + (report,),
    )
