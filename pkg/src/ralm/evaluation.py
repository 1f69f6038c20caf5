"""Positioning-error metrics, ECDF, nearest-rank percentiles and residual histograms."""
import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .geometry import true_bearing, true_range, wrap_angle


def euclidean_errors(pred, truth) -> np.ndarray:
    pred = np.asarray(pred, dtype=float).reshape(-1, 2)
    truth = np.asarray(truth, dtype=float).reshape(-1, 2)
    if len(pred) != len(truth):
        raise ValueError(f"{len(pred)} predictions vs {len(truth)} ground-truth points")
    if len(pred) == 0:
        raise ValueError("no points to compare")
    return np.hypot(pred[:, 0] - truth[:, 0], pred[:, 1] - truth[:, 1])


def ecdf(errors) -> list[tuple[float, float]]:
    """One ``(value, fraction <= value)`` pair per distinct value, ascending."""
    e = np.sort(np.asarray(errors, dtype=float).ravel())
    if e.size == 0:
        raise ValueError("ECDF of an empty sample")
    values, counts = np.unique(e, return_counts=True)
    cum = np.cumsum(counts)
    n = e.size
    return [(float(v), int(c) / n) for v, c in zip(values, cum)]


def percentile(errors, p: float) -> float:
    """Nearest-rank percentile: the ceil(p*n/100)-th smallest value (1-based)."""
    if not 0 < p <= 100:
        raise ValueError(f"percentile must lie in (0, 100], got {p}")
    e = np.sort(np.asarray(errors, dtype=float).ravel())
    if e.size == 0:
        raise ValueError("percentile of an empty sample")
    # round first so that e.g. 95 * 20 / 100 does not land on 19.000000000000004
    rank = max(1, math.ceil(round(p * e.size / 100.0, 9)))
    return float(e[rank - 1])


def metrics_summary(pred, truth) -> dict:
    pred = np.asarray(pred, dtype=float).reshape(-1, 2)
    truth = np.asarray(truth, dtype=float).reshape(-1, 2)
    err = euclidean_errors(pred, truth)
    mse = float(np.mean((pred - truth) ** 2))
    return {"mse_m2": mse, "rmse_m": math.sqrt(mse), "mean_m": float(err.mean()),
            "median_m": percentile(err, 50), "p95_m": percentile(err, 95), "count": int(err.size)}


def write_ecdf_csv(points, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["error_m", "fraction"])
        for v, f in points:
            w.writerow([repr(v), repr(f)])


def write_metrics(metrics: dict, path) -> None:
    Path(path).write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n")


@dataclass
class Histogram:
    kind: str
    edges: np.ndarray
    counts: np.ndarray

    def rows(self):
        return [(float(self.edges[i]), float(self.edges[i + 1]), int(self.counts[i]))
                for i in range(len(self.counts))]

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "count"])
            for left, right, c in self.rows():
                w.writerow([repr(left), repr(right), c])


def _histogram(values, bins, span, kind):
    values = np.asarray(values, dtype=float)
    if span is None:
        lo, hi = float(values.min()), float(values.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
    else:
        lo, hi = map(float, span)
        if not lo < hi:
            raise ValueError(f"histogram span must satisfy lo < hi, got {span}")
    edges = np.linspace(lo, hi, bins + 1)
    # out-of-span residuals land in the edge bins so counts are conserved
    idx = np.clip(np.floor((values - lo) / (hi - lo) * bins).astype(np.int64), 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(kind, edges, counts)


def measurement_residuals(measurements, truths, anchors):
    """Range and wrapped angle residuals (measured - true) of every valid observation.

    ``measurements`` is a sequence of per-sample measurement lists aligned
    with ``truths`` (true tag positions).
    """
    pos = {a.id: a.position for a in anchors}
    r_res, a_res = [], []
    for meas_list, tag in zip(measurements, truths):
        for m in meas_list:
            if m.range is not None:
                r_res.append(m.range - true_range(tag, pos[m.anchor_id]))
            if m.angle is not None:
                a_res.append(wrap_angle(m.angle - true_bearing(tag, pos[m.anchor_id])))
    return np.asarray(r_res), np.asarray(a_res)


def residual_histograms(measurements, truths, anchors, bins: int = 50, range_span=None,
                        angle_span=(-math.pi, math.pi)):
    """Histograms of range residuals (meters) and angle residuals (radians).

    ``range_span=None`` spans the observed residuals.  Values outside a
    configured span are counted in the first or last bin.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    r_res, a_res = measurement_residuals(measurements, truths, anchors)
    if r_res.size == 0 and a_res.size == 0:
        raise DataError("no valid measurements to histogram")
    out = {}
    if r_res.size:
        out["range"] = _histogram(r_res, bins, range_span, "range")
    if a_res.size:
        out["angle"] = _histogram(a_res, bins, angle_span, "angle")
    return out
