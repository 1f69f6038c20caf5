"""Per-anchor range/angle likelihood grids, fusion and network input stacking.

Each cell holds the bearing and range a tag at its center would produce
(the known term).  Comparing those with an observation through a Gaussian
kernel gives a likelihood map in [0, 1].  Values below ``FLUSH_LIMIT`` are
stored as exact zeros.

Stacked tensors use channel ``2k`` for anchor k's range map and ``2k+1``
for its angle map, anchors in ascending id order.  A failed observation
contributes an all-zero channel.
"""
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError
from .geometry import Anchor, GridSpec, Point2D, wrap_angle

FLUSH_LIMIT = 1e-300
CHANNEL_ORDER = "per-anchor ascending id; channel 2k = range, 2k+1 = angle"


@dataclass(frozen=True)
class ObservationSigmas:
    sigma_r: float = 0.3
    sigma_theta: float = math.radians(3.0)

    def __post_init__(self):
        if not (self.sigma_r > 0 and self.sigma_theta > 0):
            raise DataError(f"observation sigmas must be positive, got {self}")


@dataclass
class LikelihoodGrid:
    grid: GridSpec
    anchor_id: int
    kind: str
    values: np.ndarray
    placeholder: bool = False


@dataclass
class SampleTensor:
    values: np.ndarray            # (2K, M, N)
    target: Point2D
    mask: np.ndarray              # (K, 2) bool: [range valid, angle valid]
    anchor_ids: tuple = field(default_factory=tuple)


def known_range_grid(grid: GridSpec, anchor: Anchor) -> np.ndarray:
    X, Y = grid.centers()
    return np.hypot(X - anchor.position[0], Y - anchor.position[1])


def known_angle_grid(grid: GridSpec, anchor: Anchor) -> np.ndarray:
    X, Y = grid.centers()
    dx = X - anchor.position[0]
    dy = Y - anchor.position[1]
    theta = wrap_angle(np.arctan2(dy, dx))
    # coincident cell: degenerate bearing defined as 0
    return np.where((dx == 0) & (dy == 0), 0.0, theta)


def range_log_likelihood(known: np.ndarray, d_hat: float, sigma_r: float) -> np.ndarray:
    r = known - d_hat
    return -(r * r) / (2.0 * sigma_r * sigma_r)


def angle_log_likelihood(known: np.ndarray, theta_hat: float, sigma_theta: float) -> np.ndarray:
    r = wrap_angle(known - theta_hat)
    return -(r * r) / (2.0 * sigma_theta * sigma_theta)


def _kernel(log_l: np.ndarray) -> np.ndarray:
    v = np.exp(log_l)
    v[v < FLUSH_LIMIT] = 0.0
    return v


def range_likelihood_grid(known: np.ndarray, d_hat: float, sigma_r: float,
                          grid: Optional[GridSpec] = None, anchor_id: int = -1) -> LikelihoodGrid:
    if d_hat < 0:
        raise ValueError(f"observed range must be non-negative, got {d_hat}")
    if sigma_r <= 0:
        raise ValueError("sigma_r must be positive")
    return LikelihoodGrid(grid, anchor_id, "range", _kernel(range_log_likelihood(known, d_hat, sigma_r)))


def angle_likelihood_grid(known: np.ndarray, theta_hat: float, sigma_theta: float,
                          grid: Optional[GridSpec] = None, anchor_id: int = -1) -> LikelihoodGrid:
    if sigma_theta <= 0:
        raise ValueError("sigma_theta must be positive")
    return LikelihoodGrid(grid, anchor_id, "angle", _kernel(angle_log_likelihood(known, theta_hat, sigma_theta)))


def fuse_log(log_maps: Sequence[np.ndarray]) -> np.ndarray:
    """Sum of log-likelihood maps, i.e. the log of the fused field."""
    if len(log_maps) == 0:
        raise ValueError("nothing to fuse")
    shape = np.shape(log_maps[0])
    total = np.zeros(shape)
    for lm in log_maps:
        if np.shape(lm) != shape:
            raise DataError(f"cannot fuse maps of shapes {shape} and {np.shape(lm)}")
        total = total + lm
    return total


def fuse_grids(grids: Sequence[LikelihoodGrid]) -> np.ndarray:
    """Cellwise product of likelihood maps, accumulated in log domain."""
    if len(grids) == 0:
        raise ValueError("nothing to fuse")
    ref = grids[0].grid
    for g in grids:
        if g.placeholder:
            raise ValueError("failure placeholders cannot be fused")
        if ref is not None and g.grid is not None and g.grid != ref:
            raise DataError("likelihood grids have mismatched grid specs")
    with np.errstate(divide="ignore"):
        total = fuse_log([np.log(g.values) for g in grids])
    return np.exp(total)


class KnownTerms:
    """Known-term grids for every anchor, computed once per (grid, anchor set)."""

    def __init__(self, grid: GridSpec, anchors: Sequence[Anchor]):
        self.grid = grid
        self.anchors = tuple(sorted(anchors, key=lambda a: a.id))
        self.range = {a.id: known_range_grid(grid, a) for a in self.anchors}
        self.angle = {a.id: known_angle_grid(grid, a) for a in self.anchors}
        for arr in (*self.range.values(), *self.angle.values()):
            arr.setflags(write=False)

    @property
    def anchor_ids(self) -> tuple:
        return tuple(a.id for a in self.anchors)


def measurement_log_maps(measurements, known: KnownTerms, sigmas: ObservationSigmas) -> list[np.ndarray]:
    """Log-likelihood maps of every valid observation; failures are skipped."""
    maps = []
    for meas in measurements:
        if meas.range is not None:
            maps.append(range_log_likelihood(known.range[meas.anchor_id], meas.range, sigmas.sigma_r))
        if meas.angle is not None:
            maps.append(angle_log_likelihood(known.angle[meas.anchor_id], meas.angle, sigmas.sigma_theta))
    return maps


def measurement_grids(measurements, known: KnownTerms, sigmas: ObservationSigmas) -> list[LikelihoodGrid]:
    out = []
    for meas in measurements:
        if meas.range is not None:
            out.append(range_likelihood_grid(known.range[meas.anchor_id], meas.range, sigmas.sigma_r,
                                             known.grid, meas.anchor_id))
        if meas.angle is not None:
            out.append(angle_likelihood_grid(known.angle[meas.anchor_id], meas.angle, sigmas.sigma_theta,
                                             known.grid, meas.anchor_id))
    return out


def stack_sample(measurements, grid: GridSpec, sigmas: ObservationSigmas, target,
                 anchors: Optional[Sequence[Anchor]] = None, known: Optional[KnownTerms] = None,
                 dtype=np.float64) -> SampleTensor:
    """Stack per-anchor range and angle maps into a (2K, M, N) tensor.

    ``measurements`` must hold exactly one entry per anchor, sorted by
    anchor id.  Pass a precomputed ``known`` to share known-term grids
    across samples.
    """
    if known is None:
        if anchors is None:
            raise ValueError("either anchors or precomputed known terms are required")
        known = KnownTerms(grid, anchors)
    ids = [m.anchor_id for m in measurements]
    if len(set(ids)) != len(ids):
        raise DataError(f"duplicate anchor ids in measurements: {ids}")
    if ids != list(known.anchor_ids):
        raise DataError(f"measurements must cover anchors {list(known.anchor_ids)} in order, got {ids}")
    K = len(ids)
    M, N = grid.shape
    values = np.zeros((2 * K, M, N), dtype=dtype)
    mask = np.zeros((K, 2), dtype=bool)
    for k, meas in enumerate(measurements):
        if meas.range is not None:
            values[2 * k] = range_likelihood_grid(known.range[meas.anchor_id], meas.range, sigmas.sigma_r).values
            mask[k, 0] = True
        if meas.angle is not None:
            values[2 * k + 1] = angle_likelihood_grid(known.angle[meas.anchor_id], meas.angle,
                                                      sigmas.sigma_theta).values
            mask[k, 1] = True
    return SampleTensor(values, Point2D(float(target[0]), float(target[1])), mask, tuple(ids))
