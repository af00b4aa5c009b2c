"""Halfspace algebra turning influence-region definitions into convex cells.

An influence cell is the region a query point would carve out for itself
were it inserted as a new site: the intersection of one bisector halfspace
per existing site, the bounding-box faces (which keep the cell bounded for
queries outside the hull of the sites), and any generator-domain faces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import BoundingBox, ClusterModel
from .errors import (
    BoxExcludesPointError,
    CoincidentSitesError,
    OutsideCellError,
    UnboundedChordError,
    ValidationError,
)
from .measures import DistanceMeasure

CONTAINMENT_TOL = 1e-9
COINCIDENT_TOL = 1e-12

FACE_SITE = 0
FACE_BOX = 1
FACE_DOMAIN = 2


@dataclass(frozen=True)
class HalfSpace:
    """Closed halfspace {y : normal . y <= offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.array(self.normal, dtype=float).reshape(-1)
        if not np.all(np.isfinite(normal)) or not np.isfinite(self.offset):
            raise ValidationError("halfspace coefficients must be finite")
        if not np.any(normal != 0.0):
            raise ValidationError("halfspace normal must be non-zero")
        normal.flags.writeable = False
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    def contains(self, y, tol: float = CONTAINMENT_TOL) -> bool:
        return bool(self.normal @ np.asarray(y, dtype=float) <= self.offset + tol)


def bisector_halfspace(x, w_x: float, c, w_c: float,
                       measure: DistanceMeasure) -> HalfSpace:
    """Halfspace of points at least as attracted to x as to c.

    Contains exactly the y with D(y, x) - w_x <= D(y, c) - w_c.  The
    generator value at y cancels, so the boundary is always a hyperplane.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    if x.shape != c.shape:
        raise ValidationError("bisector endpoints must share a dimension")
    if float(np.linalg.norm(x - c)) < COINCIDENT_TOL:
        raise CoincidentSitesError("cannot bisect coincident sites")
    measure.check_domain(x)
    measure.check_domain(c)
    gx = measure.grad(x)
    gc = measure.grad(c)
    a = gc - gx
    b = (measure.phi(x) - gx @ x) - (measure.phi(c) - gc @ c) + (w_x - w_c)
    return HalfSpace(a, float(b))


def box_faces(box: BoundingBox):
    """The 2d halfspace rows of an axis-aligned box."""
    d = box.d
    eye = np.eye(d)
    A = np.vstack([eye, -eye])
    b = np.concatenate([box.hi, -box.lo])
    return A, b


@dataclass(frozen=True)
class InfluenceCell:
    """Bounded convex polytope {y : normals @ y <= offsets}.

    `kinds` records each face's provenance (site bisector, box face, or
    generator-domain face) so the sampler can report when the bounding box
    actually truncated the cell.
    """

    normals: np.ndarray
    offsets: np.ndarray
    kinds: np.ndarray
    interior_point: np.ndarray

    def __post_init__(self):
        A = np.array(self.normals, dtype=float)
        b = np.array(self.offsets, dtype=float).reshape(-1)
        kinds = np.array(self.kinds, dtype=np.int8).reshape(-1)
        x = np.array(self.interior_point, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != b.size or A.shape[0] != kinds.size:
            raise ValidationError("inconsistent halfspace arrays")
        if A.shape[1] != x.size:
            raise ValidationError("interior point dimension mismatch")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(x))):
            raise ValidationError("cell data must be finite")
        worst = float(np.max(A @ x - b))
        if worst > CONTAINMENT_TOL:
            raise OutsideCellError(
                f"interior point violates a halfspace by {worst:.3g}")
        for arr in (A, b, kinds, x):
            arr.flags.writeable = False
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "interior_point", x)

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def n_faces(self) -> int:
        return self.normals.shape[0]

    @property
    def halfspaces(self) -> list[HalfSpace]:
        return [HalfSpace(a, float(b)) for a, b in zip(self.normals, self.offsets)]


def cell_from_box(box: BoundingBox, interior=None) -> InfluenceCell:
    """A cell consisting of box faces only; handy for tests and calibration."""
    A, b = box_faces(box)
    if interior is None:
        interior = 0.5 * (box.lo + box.hi)
    kinds = np.full(A.shape[0], FACE_BOX, dtype=np.int8)
    return InfluenceCell(A, b, kinds, interior)


def build_influence_cell(x, model: ClusterModel, measure: DistanceMeasure,
                         box: BoundingBox, x_weight: float = 0.0) -> InfluenceCell:
    """Intersect the query's bisector halfspaces with box and domain faces."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != model.d:
        raise ValidationError(f"query dimension {x.size} != model dimension {model.d}")
    if box.d != model.d:
        raise ValidationError("box dimension mismatch")
    if not box.contains(x):
        raise BoxExcludesPointError("bounding box does not contain the query point")
    rows = []
    offs = []
    for c, w in zip(model.representatives, model.weights):
        h = bisector_halfspace(x, x_weight, c, float(w), measure)
        rows.append(h.normal)
        offs.append(h.offset)
    A_site = np.array(rows)
    b_site = np.array(offs)
    A_box, b_box = box_faces(box)
    A_dom, b_dom = measure.domain_halfspaces(model.d)
    A = np.vstack([A_site, A_box, A_dom])
    b = np.concatenate([b_site, b_box, b_dom])
    kinds = np.concatenate([
        np.full(model.k, FACE_SITE, dtype=np.int8),
        np.full(A_box.shape[0], FACE_BOX, dtype=np.int8),
        np.full(A_dom.shape[0], FACE_DOMAIN, dtype=np.int8),
    ])
    return InfluenceCell(A, b, kinds, x)


def cell_contains(cell: InfluenceCell, y) -> bool:
    """True iff y satisfies every halfspace within the containment tolerance."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != cell.dim or not np.all(np.isfinite(y)):
        raise ValidationError("query must be a finite vector of the cell dimension")
    return bool(np.max(cell.normals @ y - cell.offsets) <= CONTAINMENT_TOL)


def _chord_bounds(cell: InfluenceCell, z: np.ndarray, u: np.ndarray):
    """Feasible interval [t_lo, t_hi] of z + t u, plus the binding face indices."""
    slack = cell.offsets - cell.normals @ z
    worst = float(-slack.min())
    if worst > CONTAINMENT_TOL:
        raise OutsideCellError(f"point violates a halfspace by {worst:.3g}")
    slack = np.maximum(slack, 0.0)
    along = cell.normals @ u
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = slack / along
    hi = np.where(along > 0.0, ratio, np.inf)
    lo = np.where(along < 0.0, ratio, -np.inf)
    i_hi = int(np.argmin(hi))
    i_lo = int(np.argmax(lo))
    t_hi = float(hi[i_hi])
    t_lo = float(lo[i_lo])
    if not (np.isfinite(t_lo) and np.isfinite(t_hi)):
        raise UnboundedChordError("chord never exits the cell; box faces missing")
    # boundary starts may produce a microscopically inverted interval
    return min(t_lo, 0.0), max(t_hi, 0.0), i_lo, i_hi


def chord_intersect(cell: InfluenceCell, z, u):
    """Parameter range (t_min, t_max) for which z + t u stays in the cell."""
    z = np.asarray(z, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if abs(float(u @ u) - 1.0) > 1e-6:
        raise ValidationError("direction must be a unit vector")
    t_lo, t_hi, _, _ = _chord_bounds(cell, z, u)
    return t_lo, t_hi


def steal_owners(points, model: ClusterModel, measure: DistanceMeasure) -> np.ndarray:
    """Owning cluster index for each point: argmin_j D(y, c_j) - w_j.

    Ties break toward the lowest index.  The query site itself is never a
    candidate because only the k representatives are scored.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    measure.check_domain(pts)
    G, c = measure.site_linear_form(model.representatives, model.weights)
    scores = c[None, :] - pts @ G.T
    return np.argmin(scores, axis=1)


def steal_owner(y, model: ClusterModel, measure: DistanceMeasure) -> int:
    return int(steal_owners(np.asarray(y, dtype=float)[None, :], model, measure)[0])
