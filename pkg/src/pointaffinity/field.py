"""Affinity scores as a scalar field: grid evaluation, PGM heatmaps,
marching-squares contours, and the delimited grid export."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import BoundingBox, ClusterModel
from .errors import ParseError, ValidationError
from .exact import exact_affinity_2d
from .measures import DistanceMeasure
from .sampling import SamplerConfig, make_rng, mix_seed
from .scores import affinity_point, default_box

DEFAULT_LEVELS = (0.5, 0.6, 0.7, 0.8, 0.9)
FLOAT_FMT = "%.9g"


@dataclass(frozen=True)
class GridSpec:
    """Regular node grid over [x0, x1] x [y0, y1] with nx * ny nodes."""

    nx: int
    ny: int
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValidationError("grid needs at least 2 nodes per axis")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValidationError("grid bounds must have positive extent")


@dataclass(frozen=True)
class ScalarFieldGrid:
    """Scores on a regular grid; scores[iy, ix] belongs to node (ix, iy)."""

    origin: np.ndarray       # (x0, y0)
    spacing: np.ndarray      # (dx, dy)
    scores: np.ndarray       # (ny, nx) in [0, 1]

    def __post_init__(self):
        origin = np.array(self.origin, dtype=float).reshape(2)
        spacing = np.array(self.spacing, dtype=float).reshape(2)
        scores = np.array(self.scores, dtype=float)
        if scores.ndim != 2 or scores.shape[0] < 2 or scores.shape[1] < 2:
            raise ValidationError("scores must be an (ny, nx) array, ny, nx >= 2")
        if np.any(spacing <= 0.0):
            raise ValidationError("grid spacing must be positive")
        if not np.all(np.isfinite(scores)):
            raise ValidationError("scores must be finite")
        if scores.min() < -1e-9 or scores.max() > 1.0 + 1e-9:
            raise ValidationError("scores must lie in [0, 1]")
        for arr in (origin, spacing, scores):
            arr.flags.writeable = False
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "scores", scores)

    @property
    def nx(self) -> int:
        return self.scores.shape[1]

    @property
    def ny(self) -> int:
        return self.scores.shape[0]

    def node_x(self) -> np.ndarray:
        return self.origin[0] + self.spacing[0] * np.arange(self.nx)

    def node_y(self) -> np.ndarray:
        return self.origin[1] + self.spacing[1] * np.arange(self.ny)


def evaluate_affinity_field(model: ClusterModel, measure: DistanceMeasure,
                            config: SamplerConfig, spec: GridSpec,
                            box: BoundingBox | None = None,
                            x_weight: float = 0.0,
                            exact: bool = False) -> ScalarFieldGrid:
    """Score every grid node as a query point.

    Nodes coincident with a representative short-circuit to 1.  Sampled
    evaluation derives one seed per node, so the field is reproducible and
    nodes may be evaluated in any order.  `exact=True` switches to the 2D
    polygon oracle (squared-Euclidean only).
    """
    if model.d != 2:
        raise ValidationError("field evaluation needs a 2D model; project first")
    if exact and measure.name != "squared-euclidean":
        raise ValidationError("exact field evaluation supports squared-euclidean only")
    xs = np.linspace(spec.x0, spec.x1, spec.nx)
    ys = np.linspace(spec.y0, spec.y1, spec.ny)
    if box is None:
        corners = np.array([[spec.x0, spec.y0], [spec.x1, spec.y1]])
        box = default_box(model, corners, config.box_inflation)
    scores = np.empty((spec.ny, spec.nx))
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            node = np.array([x, y])
            if np.min(np.linalg.norm(model.representatives - node, axis=1)) < 1e-12:
                scores[iy, ix] = 1.0
                continue
            if exact:
                vec = exact_affinity_2d(node, model, box, x_weight=x_weight)
            else:
                rng = make_rng(mix_seed(config.seed, iy * spec.nx + ix))
                vec = affinity_point(node, model, measure, config,
                                     x_weight=x_weight, box=box, rng=rng)
            scores[iy, ix] = vec.score
    dx = (spec.x1 - spec.x0) / (spec.nx - 1)
    dy = (spec.y1 - spec.y0) / (spec.ny - 1)
    return ScalarFieldGrid(np.array([spec.x0, spec.y0]), np.array([dx, dy]), scores)


def quantize_scores(grid: ScalarFieldGrid) -> np.ndarray:
    """8-bit pixels, brighter where affinity is lower."""
    return np.floor(255.0 * (1.0 - grid.scores) + 0.5).astype(np.uint8)


def write_heatmap_pgm(grid: ScalarFieldGrid, path) -> None:
    """Binary 8-bit PGM; rows run top-down, top row at maximum y."""
    pixels = quantize_scores(grid)[::-1]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{grid.nx} {grid.ny}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def read_heatmap_pgm(path) -> np.ndarray:
    """Pixels of a binary PGM as written by write_heatmap_pgm, top row first."""
    with open(path, "rb") as fh:
        blob = fh.read()
    parts = blob.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5":
        raise ParseError(f"{path}: not a binary PGM")
    try:
        nx, ny = (int(v) for v in parts[1].split())
        maxval = int(parts[2])
    except ValueError as exc:
        raise ParseError(f"{path}: bad PGM header") from exc
    if maxval != 255:
        raise ParseError(f"{path}: expected maxval 255, got {maxval}")
    data = parts[3][:nx * ny]
    if len(data) != nx * ny:
        raise ParseError(f"{path}: truncated pixel data")
    return np.frombuffer(data, dtype=np.uint8).reshape(ny, nx)


def write_field_csv(grid: ScalarFieldGrid, path) -> None:
    xs = grid.node_x()
    ys = grid.node_y()
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("x,y,score\n")
        for iy in range(grid.ny):
            for ix in range(grid.nx):
                fh.write(FLOAT_FMT % xs[ix])
                fh.write(",")
                fh.write(FLOAT_FMT % ys[iy])
                fh.write(",")
                fh.write(FLOAT_FMT % grid.scores[iy, ix])
                fh.write("\n")


# Marching squares: corners are bit-coded (1 means value >= level) as
#   bit0 = (ix, iy), bit1 = (ix+1, iy), bit2 = (ix+1, iy+1), bit3 = (ix, iy+1)
# and each case lists the edge pairs a segment must join.  B/R/T/L denote the
# bottom/right/top/left cell edges.
_B, _R, _T, _L = 0, 1, 2, 3
_CASES: dict[int, tuple[tuple[int, int], ...]] = {
    0: (), 15: (),
    1: ((_L, _B),), 14: ((_L, _B),),
    2: ((_B, _R),), 13: ((_B, _R),),
    3: ((_L, _R),), 12: ((_L, _R),),
    4: ((_T, _R),), 11: ((_T, _R),),
    6: ((_B, _T),), 9: ((_B, _T),),
    7: ((_L, _T),), 8: ((_L, _T),),
}


def extract_contours(grid: ScalarFieldGrid, levels) -> dict[float, list]:
    """Marching-squares segments per level, endpoints interpolated on cell edges.

    Saddle cells (two opposite corners above the level) are resolved by the
    cell-average rule, which keeps the output stable and orientation-free.
    """
    levels = [float(v) for v in levels]
    if any(not 0.0 < v < 1.0 for v in levels):
        raise ValidationError("contour levels must lie strictly in (0, 1)")
    if sorted(levels) != levels or len(set(levels)) != len(levels):
        raise ValidationError("contour levels must be strictly increasing")
    xs = grid.node_x()
    ys = grid.node_y()
    f = grid.scores
    out: dict[float, list] = {}
    for level in levels:
        segments = []
        for iy in range(grid.ny - 1):
            for ix in range(grid.nx - 1):
                v00 = f[iy, ix]
                v10 = f[iy, ix + 1]
                v11 = f[iy + 1, ix + 1]
                v01 = f[iy + 1, ix]
                case = ((v00 >= level) | (v10 >= level) << 1
                        | (v11 >= level) << 2 | (v01 >= level) << 3)
                if case in (0, 15):
                    continue

                def edge_point(edge: int):
                    if edge == _B:
                        pa, pb, fa, fb = (xs[ix], ys[iy]), (xs[ix + 1], ys[iy]), v00, v10
                    elif edge == _R:
                        pa, pb, fa, fb = (xs[ix + 1], ys[iy]), (xs[ix + 1], ys[iy + 1]), v10, v11
                    elif edge == _T:
                        pa, pb, fa, fb = (xs[ix], ys[iy + 1]), (xs[ix + 1], ys[iy + 1]), v01, v11
                    else:
                        pa, pb, fa, fb = (xs[ix], ys[iy]), (xs[ix], ys[iy + 1]), v00, v01
                    t = (level - fa) / (fb - fa)
                    return (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]))

                if case in (5, 10):
                    center_above = 0.25 * (v00 + v10 + v11 + v01) >= level
                    if (case == 5) == center_above:
                        pairs = ((_L, _T), (_B, _R))
                    else:
                        pairs = ((_L, _B), (_T, _R))
                else:
                    pairs = _CASES[case]
                for ea, eb in pairs:
                    segments.append((edge_point(ea), edge_point(eb)))
        out[level] = segments
    return out


def chain_segments(segments) -> list[np.ndarray]:
    """Join segments sharing endpoints into polylines.

    Shared endpoints are bitwise equal because adjacent cells interpolate
    the same two node values, so exact matching suffices.
    """
    adj: dict[tuple[float, float], list[int]] = {}
    for i, (a, b) in enumerate(segments):
        adj.setdefault(a, []).append(i)
        adj.setdefault(b, []).append(i)
    used = [False] * len(segments)
    polylines = []
    for i in range(len(segments)):
        if used[i]:
            continue
        used[i] = True
        a, b = segments[i]
        chain = [a, b]
        for grow_end in (True, False):
            while True:
                tip = chain[-1] if grow_end else chain[0]
                nxt = None
                for j in adj.get(tip, ()):
                    if not used[j]:
                        nxt = j
                        break
                if nxt is None:
                    break
                used[nxt] = True
                p, q = segments[nxt]
                point = q if p == tip else p
                if grow_end:
                    chain.append(point)
                else:
                    chain.insert(0, point)
        polylines.append(np.array(chain))
    return polylines


def write_contours_svg(grid: ScalarFieldGrid, levels, path) -> None:
    """SVG 1.1 document with one path group per contour level, y up."""
    contours = extract_contours(grid, levels)
    x0, y0 = grid.origin
    width = grid.spacing[0] * (grid.nx - 1)
    height = grid.spacing[1] * (grid.ny - 1)
    y_top = y0 + height
    stroke = max(width, height) / 400.0
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {FLOAT_FMT % width} {FLOAT_FMT % height}">',
    ]
    for level in contours:
        lines.append(f'<g id="level-{FLOAT_FMT % level}" fill="none" '
                     f'stroke="black" stroke-width="{FLOAT_FMT % stroke}">')
        for poly in chain_segments(contours[level]):
            coords = " L ".join(
                f"{FLOAT_FMT % (px - x0)},{FLOAT_FMT % (y_top - py)}"
                for px, py in poly)
            lines.append(f'<path d="M {coords}"/>')
        lines.append("</g>")
    lines.append("</svg>")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
