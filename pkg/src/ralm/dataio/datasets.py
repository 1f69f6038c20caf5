"""Measurement and tensor datasets stored in the array container.

A *measurements* container (``kind = "measurements"``) holds, for S tag
states and K anchors:

==============  =========  ===============================================
array           shape      content
==============  =========  ===============================================
``positions``   (S, 2)     true x, y in meters
``tag_ids``     (S,)       tag id
``time_steps``  (S,)       time step ordinal
``anchors``     (K, 3)     id, x, y (ascending id)
``ranges``      (S, K)     measured range in meters, NaN when absent
``angles``      (S, K)     measured angle in radians, NaN when absent
``conditions``  (S, K)     0 LOS, 1 NLOS, 2 Outlier, 3 Failure
==============  =========  ===============================================

A *tensors* container (``kind = "tensors"``) holds ``tensors`` (S, 2K, M, N),
``targets`` (S, 2), ``mask`` (S, K, 2) and ``tag_ids`` / ``time_steps``.
Its meta records the channel ordering, grid, observation sigmas, seed and
the scenario digest.
"""
from dataclasses import dataclass, field

import numpy as np

from ..channel import ChannelCondition, Measurement
from ..errors import DataError, FormatError
from ..geometry import Anchor, CabinSpec, GridSpec, Point2D, wrap_angle
from ..likelihood import ObservationSigmas
from .container import read_container, write_container


@dataclass
class MeasurementSet:
    positions: np.ndarray
    tag_ids: np.ndarray
    time_steps: np.ndarray
    anchors: tuple
    ranges: np.ndarray
    angles: np.ndarray
    conditions: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.positions)

    def measurements(self, i: int) -> list[Measurement]:
        # float32 storage can push an angle just past pi; re-wrap on the way out
        out = []
        for k, a in enumerate(self.anchors):
            r, th = self.ranges[i, k], self.angles[i, k]
            out.append(Measurement(a.id, None if np.isnan(r) else float(r),
                                   None if np.isnan(th) else wrap_angle(float(th)),
                                   ChannelCondition.from_code(int(self.conditions[i, k]))))
        return out

    @property
    def grid(self) -> GridSpec:
        return grid_from_meta(self.meta)

    @property
    def sigmas(self) -> ObservationSigmas:
        return ObservationSigmas(**self.meta["observation"])

    def arrays(self) -> dict:
        anchors = np.array([[a.id, a.position.x, a.position.y] for a in self.anchors], dtype=float)
        return {"positions": self.positions, "tag_ids": self.tag_ids, "time_steps": self.time_steps,
                "anchors": anchors.reshape(-1, 3), "ranges": self.ranges, "angles": self.angles,
                "conditions": self.conditions}


@dataclass
class TensorSet:
    tensors: np.ndarray
    targets: np.ndarray
    mask: np.ndarray
    tag_ids: np.ndarray
    time_steps: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.targets)

    def arrays(self) -> dict:
        return {"tensors": self.tensors, "targets": self.targets, "mask": self.mask,
                "tag_ids": self.tag_ids, "time_steps": self.time_steps}


def grid_from_meta(meta: dict) -> GridSpec:
    try:
        g = meta["grid"]
        return GridSpec(CabinSpec(**g["bounds"]), int(g["rows"]), int(g["cols"]))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"dataset header lacks a usable grid description ({exc})") from None


def grid_to_meta(grid: GridSpec) -> dict:
    b = grid.bounds
    return {"bounds": {"x_min": b.x_min, "x_max": b.x_max, "y_min": b.y_min, "y_max": b.y_max},
            "rows": grid.rows, "cols": grid.cols}


def write_dataset(data, path) -> None:
    kind = "measurements" if isinstance(data, MeasurementSet) else "tensors"
    write_container(path, data.arrays(), data.meta, kind)


def _need(arrays, names, path):
    missing = [n for n in names if n not in arrays]
    if missing:
        raise FormatError(f"{path}: missing arrays {missing}")


def read_dataset(path, kind=None):
    """Read a measurements or tensors container; ``kind`` optionally enforces which."""
    arrays, meta = read_container(path, kind)
    if "ranges" in arrays:
        _need(arrays, ["positions", "tag_ids", "time_steps", "anchors", "ranges", "angles", "conditions"], path)
        anchors = tuple(Anchor(int(r[0]), Point2D(float(r[1]), float(r[2]))) for r in arrays["anchors"])
        S, K = arrays["ranges"].shape if arrays["ranges"].ndim == 2 else (-1, -1)
        if K != len(anchors) or arrays["angles"].shape != (S, K) or arrays["positions"].shape != (S, 2):
            raise FormatError(f"{path}: inconsistent measurement array shapes")
        return MeasurementSet(arrays["positions"].astype(np.float64), arrays["tag_ids"].astype(np.int64),
                              arrays["time_steps"].astype(np.int64), anchors,
                              arrays["ranges"].astype(np.float64), arrays["angles"].astype(np.float64),
                              arrays["conditions"].astype(np.int64), meta)
    _need(arrays, ["tensors", "targets", "mask", "tag_ids", "time_steps"], path)
    t = arrays["tensors"]
    if t.ndim != 4 or t.shape[1] % 2 or arrays["targets"].shape != (len(t), 2):
        raise FormatError(f"{path}: inconsistent tensor array shapes {t.shape}")
    return TensorSet(t, arrays["targets"].astype(np.float64), arrays["mask"].astype(bool),
                     arrays["tag_ids"].astype(np.int64), arrays["time_steps"].astype(np.int64), meta)


def require_kind(data, cls, path):
    if not isinstance(data, cls):
        raise DataError(f"{path}: expected a {cls.__name__} file")
    return data
