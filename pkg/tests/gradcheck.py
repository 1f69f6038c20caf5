"""Central finite-difference oracle, independent of any backward pass."""
import numpy as np

H = 1e-5


def numerical_grad(f, x, h=H):
    """d f() / d x by central differences; ``x`` is perturbed in place and restored."""
    g = np.zeros_like(x, dtype=np.float64)
    for idx in np.ndindex(x.shape):
        orig = x[idx]
        x[idx] = orig + h
        fp = f()
        x[idx] = orig - h
        fm = f()
        x[idx] = orig
        g[idx] = (fp - fm) / (2 * h)
    return g


def max_rel_error(analytic, numeric):
    """Max abs difference scaled by the largest gradient magnitude."""
    scale = max(np.max(np.abs(numeric)), np.max(np.abs(analytic)), 1e-12)
    return float(np.max(np.abs(analytic - numeric)) / scale)
