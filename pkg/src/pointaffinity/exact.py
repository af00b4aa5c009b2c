"""Ground-truth affinity oracles for low dimensions.

Exact 2D scores come from halfplane clipping plus shoelace areas; a
deterministic grid counter covers d <= 4 where polygon clipping does not
apply.  Both exist to validate the sampling path, so neither depends on it.
"""

from __future__ import annotations

import numpy as np

from .cells import COINCIDENT_TOL, HalfSpace, bisector_halfspace, build_influence_cell
from .data import BoundingBox, ClusterModel
from .errors import BoxExcludesPointError, EmptyCellError, ValidationError
from .measures import DistanceMeasure, squared_euclidean
from .scores import (
    AffinityVector,
    _alphas_from_counts,
    _force_unit_sum,
    _power_scores,
    classify_stability,
    indicator_affinity,
)

CLIP_TOL = 1e-12


def box_polygon(box: BoundingBox) -> np.ndarray:
    """Counter-clockwise corner list of a 2D box."""
    (x0, y0), (x1, y1) = box.lo, box.hi
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


def clip_polygon(poly: np.ndarray, half: HalfSpace) -> np.ndarray:
    """Intersect a convex CCW polygon with one halfplane (Sutherland-Hodgman)."""
    pts = np.asarray(poly, dtype=float)
    if pts.size == 0:
        return np.zeros((0, 2))
    a0, a1 = half.normal
    b = half.offset
    xs = pts[:, 0].tolist()
    ys = pts[:, 1].tolist()
    s = [a0 * px + a1 * py - b for px, py in zip(xs, ys)]
    inside = [v <= CLIP_TOL for v in s]
    if all(inside):
        return pts.copy()
    out: list[tuple[float, float]] = []
    n = len(xs)
    for i in range(n):
        j = (i + 1) % n
        if inside[i]:
            out.append((xs[i], ys[i]))
        if inside[i] != inside[j]:
            t = s[i] / (s[i] - s[j])
            out.append((xs[i] + t * (xs[j] - xs[i]), ys[i] + t * (ys[j] - ys[i])))
    if not out:
        return np.zeros((0, 2))
    return np.array(out)


def polygon_area(poly: np.ndarray) -> float:
    """Shoelace area; 0 for empty or degenerate polygons."""
    pts = np.asarray(poly, dtype=float)
    if pts.shape[0] < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def polygon_is_convex_ccw(poly: np.ndarray, tol: float = 1e-9) -> bool:
    pts = np.asarray(poly, dtype=float)
    n = pts.shape[0]
    if n < 3:
        return True
    e = np.roll(pts, -1, axis=0) - pts
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    scale = float(np.abs(e).max()) ** 2 + 1.0
    return bool(np.all(cross >= -tol * scale))


def _touches_box(poly: np.ndarray, box: BoundingBox, tol: float = 1e-9) -> bool:
    if poly.size == 0:
        return False
    near_lo = np.abs(poly - box.lo) <= tol
    near_hi = np.abs(poly - box.hi) <= tol
    return bool(np.any(near_lo | near_hi))


def exact_affinity_2d(x, model: ClusterModel, box: BoundingBox,
                      x_weight: float = 0.0) -> AffinityVector:
    """Exact affinity in the plane under the (weighted) squared-Euclidean rule.

    The stolen share of cluster i is the area of the query's cell clipped to
    i's power region, normalized so the fractions sum to one.
    """
    measure = squared_euclidean()
    if model.d != 2:
        raise ValidationError("exact oracle works in 2D only")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != 2 or not np.all(np.isfinite(x)):
        raise ValidationError("query must be a finite 2-vector")
    gaps = np.linalg.norm(model.representatives - x, axis=1)
    nearest = int(np.argmin(gaps))
    if gaps[nearest] < COINCIDENT_TOL:
        return indicator_affinity(model.k, nearest)
    scores = _power_scores(x, model, measure)
    best = int(np.argmin(scores))
    if scores[best] + x_weight < -COINCIDENT_TOL:
        return indicator_affinity(model.k, best)
    if not box.contains(x):
        raise BoxExcludesPointError("bounding box does not contain the query point")
    reps = model.representatives
    w = model.weights
    cell_poly = box_polygon(box)
    for j in range(model.k):
        cell_poly = clip_polygon(
            cell_poly, bisector_halfspace(x, x_weight, reps[j], float(w[j]), measure))
    total = polygon_area(cell_poly)
    if total <= 0.0:
        return indicator_affinity(model.k, best)
    clipped = _touches_box(cell_poly, box)
    areas = np.zeros(model.k)
    for i in range(model.k):
        piece = cell_poly
        for j in range(model.k):
            if j == i or piece.size == 0:
                continue
            piece = clip_polygon(
                piece, bisector_halfspace(reps[i], float(w[i]), reps[j], float(w[j]), measure))
        areas[i] = polygon_area(piece)
    stolen = float(areas.sum())
    if stolen <= 0.0:
        return indicator_affinity(model.k, best)
    alphas = _force_unit_sum(areas / stolen)
    stable, score, stable_index = classify_stability(alphas)
    return AffinityVector(alphas, stable, score, stable_index, clipped)


def grid_affinity(x, model: ClusterModel, measure: DistanceMeasure,
                  resolution: int, box: BoundingBox, x_weight: float = 0.0,
                  chunk_size: int = 1 << 18) -> AffinityVector:
    """Deterministic oracle: count grid cell centers of the box per stealing cluster.

    Cost grows as resolution**d, hence the d <= 4 guard.
    """
    if model.d > 4:
        raise ValidationError("grid oracle is limited to d <= 4")
    if resolution < 16:
        raise ValidationError("resolution must be at least 16")
    x = np.asarray(x, dtype=float).reshape(-1)
    measure.check_domain(x)
    gaps = np.linalg.norm(model.representatives - x, axis=1)
    nearest = int(np.argmin(gaps))
    if gaps[nearest] < COINCIDENT_TOL:
        return indicator_affinity(model.k, nearest)
    scores = _power_scores(x, model, measure)
    best = int(np.argmin(scores))
    if scores[best] + x_weight < -COINCIDENT_TOL:
        return indicator_affinity(model.k, best)
    cell = build_influence_cell(x, model, measure, box, x_weight=x_weight)
    d = model.d
    step = box.span / resolution
    axes = [box.lo[a] + (np.arange(resolution) + 0.5) * step[a] for a in range(d)]
    G, c = measure.site_linear_form(model.representatives, model.weights)
    counts = np.zeros(model.k, dtype=np.int64)
    clipped = False
    total = resolution ** d
    for begin in range(0, total, chunk_size):
        idx = np.arange(begin, min(begin + chunk_size, total))
        pts = np.empty((idx.size, d))
        digits = np.empty((idx.size, d), dtype=np.int64)
        rem = idx
        for a in range(d - 1, -1, -1):
            dig = rem % resolution
            digits[:, a] = dig
            pts[:, a] = axes[a][dig]
            rem = rem // resolution
        inside = np.all(pts @ cell.normals.T <= cell.offsets, axis=1)
        if not np.any(inside):
            continue
        p_in = pts[inside]
        owners = np.argmin(c[None, :] - p_in @ G.T, axis=1)
        counts += np.bincount(owners, minlength=model.k)
        if not clipped:
            edge = np.any((digits[inside] == 0) | (digits[inside] == resolution - 1), axis=1)
            clipped = bool(np.any(edge))
    hits = int(counts.sum())
    if hits == 0:
        raise EmptyCellError("no grid cell centers fell inside the influence cell")
    alphas = _alphas_from_counts(counts, hits)
    stable, score, stable_index = classify_stability(alphas)
    return AffinityVector(alphas, stable, score, stable_index, clipped)
