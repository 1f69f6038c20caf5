"""Network-free position estimates from fused likelihood fields.

Both estimators accept either a likelihood field (``log_domain=False``)
or its logarithm.  The log form avoids underflow when many sharp maps are
fused.  A cell with log value ``-inf`` is a zero-likelihood cell.
"""
import numpy as np

from .errors import NoInformationError
from .geometry import GridSpec, Point2D, cell_center


def _check_shape(field, grid):
    field = np.asarray(field, dtype=float)
    if field.shape != grid.shape:
        raise ValueError(f"field shape {field.shape} does not match grid {grid.shape}")
    if field.size == 0:
        raise ValueError("empty field")
    return field


def argmax_position(field, grid: GridSpec, log_domain: bool = False):
    """Center of the maximizing cell, with ties going to the smallest (row, col).

    Returns ``(Point2D, row, col)``.
    """
    field = _check_shape(field, grid)
    if log_domain:
        if not np.any(np.isfinite(field)):
            raise NoInformationError("log-likelihood field has no finite cell")
    elif not np.any(field > 0):
        raise NoInformationError("likelihood field is all zero")
    # np.argmax returns the first maximum in C order, which is lexicographic (row, col)
    flat = int(np.argmax(field))
    m, n = divmod(flat, grid.cols)
    return cell_center(grid, m, n), m, n


def weighted_centroid(field, grid: GridSpec, log_domain: bool = False) -> Point2D:
    field = _check_shape(field, grid)
    if log_domain:
        top = np.max(field)
        if not np.isfinite(top):
            raise NoInformationError("log-likelihood field has no finite cell")
        w = np.exp(field - top)
    else:
        w = field
    total = w.sum()
    if not total > 0:
        raise NoInformationError("likelihood field sums to zero")
    X, Y = grid.centers()
    return Point2D(float((w * X).sum() / total), float((w * Y).sum() / total))
