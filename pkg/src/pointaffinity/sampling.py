"""Approximately uniform sampling from influence cells.

The walk is plain hit-and-run preceded by a whitening pass: a pilot walk
estimates the cell's covariance, whose inverse square root reshapes the
direction distribution so elongated cells mix at a useful rate.  Chords are
always intersected in the original frame, so every emitted point satisfies
the cell's halfspaces directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cells import FACE_BOX, InfluenceCell, _chord_bounds, cell_contains
from .errors import OutsideCellError, ValidationError

DEFAULT_BURN_IN = 1000
DEFAULT_EPSILON = 0.04
DEFAULT_DELTA = 0.05
COV_COND_LIMIT = 1e12

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


def mix_seed(seed: int, index: int) -> int:
    """Derive an independent 64-bit stream seed (splitmix64 of seed + golden step)."""
    z = (seed + (index + 1) * _GOLDEN64) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) so streams are cheap to derive and replay."""
    return np.random.Generator(np.random.Philox(seed & _MASK64))


def default_pilot_steps(dim: int) -> int:
    return max(200, 10 * dim)


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs for one sampling run.

    `pilot_steps=None` resolves to max(200, 10 * dim); 0 disables whitening.
    `epsilon`/`delta` drive the sample-size bound, not the walk itself.
    """

    m: int = 1000
    burn_in: int = DEFAULT_BURN_IN
    pilot_steps: int | None = None
    seed: int = 0
    epsilon: float = DEFAULT_EPSILON
    delta: float = DEFAULT_DELTA
    box_inflation: float = 2.0

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("m must be at least 1")
        if self.burn_in < 0:
            raise ValidationError("burn_in must be non-negative")
        if self.pilot_steps is not None and self.pilot_steps < 0:
            raise ValidationError("pilot_steps must be non-negative")
        if not 0.0 < self.epsilon < 1.0:
            raise ValidationError("epsilon must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValidationError("delta must lie in (0, 1)")
        if self.box_inflation < 1.0:
            raise ValidationError("box_inflation must be at least 1")


@dataclass(frozen=True)
class WhiteningTransform:
    """Affine map T(y) = forward @ (y - shift) with explicit inverse."""

    forward: np.ndarray
    inverse: np.ndarray
    shift: np.ndarray

    def apply(self, y: np.ndarray) -> np.ndarray:
        return self.forward @ (np.asarray(y, dtype=float) - self.shift)

    def invert(self, z: np.ndarray) -> np.ndarray:
        return self.inverse @ np.asarray(z, dtype=float) + self.shift


def _identity_transform(dim: int, shift=None) -> WhiteningTransform:
    eye = np.eye(dim)
    if shift is None:
        shift = np.zeros(dim)
    return WhiteningTransform(eye, eye, np.asarray(shift, dtype=float))


@dataclass
class WalkStats:
    """Mutable per-walk diagnostics; box hits reveal bounding-box clipping."""

    steps: int = 0
    box_face_hits: int = 0


def _raw_step(cell: InfluenceCell, inverse: np.ndarray | None, z: np.ndarray,
              rng: np.random.Generator, stats: WalkStats | None) -> np.ndarray:
    g = rng.standard_normal(cell.dim)
    norm = float(np.sqrt(g @ g))
    while norm == 0.0:  # essentially unreachable
        g = rng.standard_normal(cell.dim)
        norm = float(np.sqrt(g @ g))
    u = g / norm
    if inverse is not None:
        u = inverse @ u
        u = u / float(np.sqrt(u @ u))
    t_lo, t_hi, i_lo, i_hi = _chord_bounds(cell, z, u)
    t = rng.uniform(t_lo, t_hi)
    if stats is not None:
        stats.steps += 1
        if cell.kinds[i_lo] == FACE_BOX or cell.kinds[i_hi] == FACE_BOX:
            stats.box_face_hits += 1
    return z + t * u


def hit_and_run_step(cell: InfluenceCell, transform: WhiteningTransform | None,
                     z, rng: np.random.Generator,
                     stats: WalkStats | None = None) -> np.ndarray:
    """One move: sphere direction in the whitened frame, uniform point on the chord."""
    z = np.asarray(z, dtype=float).reshape(-1)
    inverse = None if transform is None else transform.inverse
    return _raw_step(cell, inverse, z, rng, stats)


def estimate_whitening(cell: InfluenceCell, start, pilot_steps: int,
                       rng: np.random.Generator,
                       stats: WalkStats | None = None) -> WhiteningTransform:
    """Whitening from a pilot walk: center on its mean, scale by cov^(-1/2).

    Falls back to a pure translation when the pilot covariance is singular
    or has condition number beyond COV_COND_LIMIT.
    """
    start = np.asarray(start, dtype=float).reshape(-1)
    if not cell_contains(cell, start):
        raise OutsideCellError("whitening start point is outside the cell")
    dim = cell.dim
    if pilot_steps <= 0:
        return _identity_transform(dim)
    states = np.empty((pilot_steps, dim))
    z = start
    for i in range(pilot_steps):
        z = _raw_step(cell, None, z, rng, stats)
        states[i] = z
    mean = states.mean(axis=0)
    if pilot_steps < max(2, dim + 1):
        return _identity_transform(dim, mean)
    cov = np.atleast_2d(np.cov(states, rowvar=False))
    if not np.all(np.isfinite(cov)):
        return _identity_transform(dim, mean)
    evals, evecs = np.linalg.eigh(cov)
    if evals[0] <= 0.0 or evals[-1] / evals[0] > COV_COND_LIMIT:
        return _identity_transform(dim, mean)
    forward = (evecs * (1.0 / np.sqrt(evals))) @ evecs.T
    inverse = (evecs * np.sqrt(evals)) @ evecs.T
    return WhiteningTransform(forward, inverse, mean)


def sample_polytope(cell: InfluenceCell, start, config: SamplerConfig,
                    rng: np.random.Generator | None = None,
                    stats: WalkStats | None = None) -> np.ndarray:
    """Draw config.m approximately uniform points from the cell.

    Pilot whitening, then config.burn_in discarded moves from `start`, then
    one emitted point per subsequent move.  The output is a pure function
    of (cell, start, config, seed).
    """
    start = np.asarray(start, dtype=float).reshape(-1)
    if rng is None:
        rng = make_rng(config.seed)
    pilot = config.pilot_steps
    if pilot is None:
        pilot = default_pilot_steps(cell.dim)
    transform = estimate_whitening(cell, start, pilot, rng, stats)
    z = start
    for _ in range(config.burn_in):
        z = _raw_step(cell, transform.inverse, z, rng, stats)
    out = np.empty((config.m, cell.dim))
    for i in range(config.m):
        z = _raw_step(cell, transform.inverse, z, rng, stats)
        out[i] = z
    return out
