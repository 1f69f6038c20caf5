"""Cabin and anchor geometry, true range/bearing, grid <-> world mapping.

Grid convention: row index ``m`` runs along y, column index ``n`` along x,
and a cell's value is located at its center.
"""
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DataError, DegenerateBearingWarning, OutOfBoundsError


class Point2D(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class CabinSpec:
    x_min: float = 0.0
    x_max: float = 30.0
    y_min: float = 0.0
    y_max: float = 3.5

    def __post_init__(self):
        vals = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"cabin bounds must be finite, got {vals}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise DataError(f"cabin bounds must satisfy min < max, got {vals}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, p, tol: float = 0.0) -> bool:
        return (self.x_min - tol <= p[0] <= self.x_max + tol
                and self.y_min - tol <= p[1] <= self.y_max + tol)


@dataclass(frozen=True)
class Anchor:
    id: int
    position: Point2D


@dataclass(frozen=True)
class GridSpec:
    bounds: CabinSpec
    rows: int
    cols: int

    def __post_init__(self):
        if int(self.rows) < 2 or int(self.cols) < 2:
            raise DataError(f"grid needs at least 2x2 cells, got {self.rows}x{self.cols}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def dx(self) -> float:
        return self.bounds.width / self.cols

    @property
    def dy(self) -> float:
        return self.bounds.height / self.rows

    @property
    def cell_diagonal(self) -> float:
        return math.hypot(self.dx, self.dy)

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (X, Y) arrays of shape (rows, cols) with cell-center coordinates."""
        xs = self.bounds.x_min + (np.arange(self.cols) + 0.5) * self.dx
        ys = self.bounds.y_min + (np.arange(self.rows) + 0.5) * self.dy
        X, Y = np.meshgrid(xs, ys)
        return X, Y


DEFAULT_ANCHORS = tuple(
    Anchor(i, Point2D(x, y))
    for i, (y, x) in enumerate((y, x) for y in (0.2, 3.3) for x in (3.0, 11.0, 19.0, 27.0))
)


def validate_anchors(anchors, cabin: CabinSpec) -> None:
    ids = [a.id for a in anchors]
    if len(set(ids)) != len(ids):
        raise DataError(f"anchor ids must be unique, got {ids}")
    for a in anchors:
        if a.id < 0:
            raise DataError(f"anchor id must be non-negative, got {a.id}")
        if not cabin.contains(a.position):
            raise OutOfBoundsError(f"anchor {a.id} at {tuple(a.position)} lies outside the cabin")


def true_range(tag, anchor) -> float:
    return math.hypot(tag[0] - anchor[0], tag[1] - anchor[1])


def wrap_angle(a):
    """Wrap angle(s) into (-pi, pi].  Works on scalars and arrays."""
    w = np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2.0 * np.pi)
    # mod can round up to exactly 2*pi for tiny negative arguments
    w = np.where(w <= -np.pi, np.pi, w)
    if np.ndim(w) == 0:
        return float(w)
    return w


def true_bearing(tag, anchor) -> float:
    """Azimuth of ``tag`` seen from ``anchor``, in (-pi, pi].

    Coincident points have no bearing; 0.0 is returned and a
    :class:`DegenerateBearingWarning` is issued.
    """
    dx = tag[0] - anchor[0]
    dy = tag[1] - anchor[1]
    if dx == 0.0 and dy == 0.0:
        warnings.warn("bearing between coincident points", DegenerateBearingWarning, stacklevel=2)
        return 0.0
    return wrap_angle(math.atan2(dy, dx))


def cell_center(grid: GridSpec, m: int, n: int) -> Point2D:
    if not (0 <= m < grid.rows and 0 <= n < grid.cols):
        raise IndexError(f"cell ({m}, {n}) outside {grid.rows}x{grid.cols} grid")
    b = grid.bounds
    return Point2D(b.x_min + (n + 0.5) * grid.dx, b.y_min + (m + 0.5) * grid.dy)


def containing_cell(grid: GridSpec, p) -> tuple[int, int]:
    b = grid.bounds
    if not b.contains(p):
        raise OutOfBoundsError(f"point {tuple(p)} outside grid bounds")
    n = min(int(math.floor((p[0] - b.x_min) / grid.dx)), grid.cols - 1)
    m = min(int(math.floor((p[1] - b.y_min) / grid.dy)), grid.rows - 1)
    return m, n
