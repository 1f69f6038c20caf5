"""True tag positions: uniform sampling, a boarding-walk proxy, CSV ingestion.

The boarding walk is a deliberately simple stand-in for a full boarding
simulation.  Every passenger enters at the front door, steps to the aisle
centerline, walks aft to an assigned seat row and turns in to the seat.
It produces cabin-shaped spatial distributions, not boarding dynamics.
"""
import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, OutOfBoundsError
from .geometry import CabinSpec, Point2D
from .rng import Purpose, generator

CSV_HEADER = ["tag_id", "time_step", "x", "y"]

SEAT_FRACTIONS = (0.08, 0.22, 0.36, 0.64, 0.78, 0.92)


@dataclass(frozen=True)
class TagState:
    tag_id: int
    time_step: int
    position: Point2D


def sample_uniform_positions(cabin: CabinSpec, count: int, seed: int) -> list[TagState]:
    """``count`` i.i.d. uniform positions; sample ``i`` uses its own substream."""
    states = []
    for i in range(count):
        u = generator(seed, Purpose.POSITION, i).random(2)
        p = Point2D(cabin.x_min + u[0] * cabin.width, cabin.y_min + u[1] * cabin.height)
        states.append(TagState(i, 0, p))
    return states


def door_position(cabin: CabinSpec) -> Point2D:
    return Point2D(cabin.x_min + min(1.0, 0.5 * cabin.width), cabin.y_min)


def _walk(path, step_length):
    """Points every ``step_length`` along a polyline, always ending on its last vertex."""
    pts = [np.asarray(path[0], dtype=float)]
    carry = 0.0
    for a, b in zip(path[:-1], path[1:]):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        seg = float(np.hypot(*(b - a)))
        if seg == 0.0:
            continue
        s = step_length - carry
        while s <= seg + 1e-12:
            pts.append(a + (b - a) * min(s / seg, 1.0))
            s += step_length
        carry = seg - (s - step_length)
    if np.hypot(*(pts[-1] - np.asarray(path[-1], dtype=float))) > 1e-9:
        pts.append(np.asarray(path[-1], dtype=float))
    return pts


def generate_boarding_walk(cabin: CabinSpec, n_passengers: int = 148, step_length: float = 0.5,
                           seed: int = 0, entry_gap: int = 2) -> list[TagState]:
    if n_passengers < 1:
        raise ValueError("n_passengers must be >= 1")
    if step_length <= 0:
        raise ValueError("step_length must be positive")
    n_rows = max(25, math.ceil(n_passengers / len(SEAT_FRACTIONS)))
    door = door_position(cabin)
    first_row = min(door.x + 2.0, cabin.x_max)
    row_x = np.linspace(first_row, cabin.x_max - 0.05 * cabin.width, n_rows)
    row_x = np.clip(row_x, cabin.x_min, cabin.x_max)
    aisle_y = cabin.y_min + 0.5 * cabin.height
    seats = [(r, s) for r in range(n_rows) for s in range(len(SEAT_FRACTIONS))]
    rng = generator(seed, Purpose.BOARDING, 0)
    order = rng.permutation(len(seats))

    states = []
    for p in range(n_passengers):
        r, s = seats[order[p % len(seats)]]
        seat = (row_x[r], cabin.y_min + SEAT_FRACTIONS[s] * cabin.height)
        path = [door, (door.x, aisle_y), (row_x[r], aisle_y), seat]
        for k, q in enumerate(_walk(path, step_length)):
            x = min(max(float(q[0]), cabin.x_min), cabin.x_max)
            y = min(max(float(q[1]), cabin.y_min), cabin.y_max)
            states.append(TagState(p, p * entry_gap + k, Point2D(x, y)))
    return states


def load_positions_csv(path, cabin: CabinSpec) -> list[TagState]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"positions file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != CSV_HEADER:
            raise DataError(f"{path}: expected header {','.join(CSV_HEADER)!r}, got {header!r}")
        states = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise DataError(f"{path}: row {row_no}: expected 4 fields, got {len(row)}")
            try:
                tag_id, step = int(row[0]), int(row[1])
                x, y = float(row[2]), float(row[3])
            except ValueError as exc:
                raise DataError(f"{path}: row {row_no}: malformed value ({exc})") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise DataError(f"{path}: row {row_no}: non-finite coordinate")
            if not cabin.contains((x, y)):
                raise OutOfBoundsError(f"{path}: row {row_no}: position ({x}, {y}) outside cabin bounds")
            states.append(TagState(tag_id, step, Point2D(x, y)))
    return states


def write_positions_csv(states, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for s in states:
            w.writerow([s.tag_id, s.time_step, repr(float(s.position.x)), repr(float(s.position.y))])
