"""Layer primitives with explicit forward/backward pairs.

Tensors are NCHW.  Every ``*_forward`` returns ``(out, cache)`` and the
matching ``*_backward`` consumes the upstream gradient and that cache.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BN_EPS = 1e-5
BN_MOMENTUM = 0.9


def conv_output_size(size: int, k: int, stride: int, pad: int) -> int:
    return (size + 2 * pad - k) // stride + 1


def conv2d_forward(x, w, stride=1, pad=None):
    """Strided cross-correlation (no kernel flip, no bias).

    ``x``: (B, C, H, W); ``w``: (F, C, kh, kw).  ``pad`` defaults to
    ``kh // 2`` (1 for 3x3, 0 for 1x1).
    """
    if x.ndim != 4 or w.ndim != 4:
        raise ValueError(f"conv2d expects 4-D input and kernel, got {x.shape} and {w.shape}")
    if x.shape[1] != w.shape[1]:
        raise ValueError(f"input has {x.shape[1]} channels, kernel expects {w.shape[1]}")
    F, C, kh, kw = w.shape
    if pad is None:
        pad = kh // 2
    B, _, H, W = x.shape
    Ho = conv_output_size(H, kh, stride, pad)
    Wo = conv_output_size(W, kw, stride, pad)
    if Ho < 1 or Wo < 1:
        raise ValueError(f"input {H}x{W} too small for kernel {kh}x{kw}")
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride][:, :, :Ho, :Wo]
    # im2col: rows are output pixels (b, i, j), columns are (c, di, dj)
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(B * Ho * Wo, C * kh * kw)
    out = cols @ w.reshape(F, -1).T
    out = np.ascontiguousarray(out.reshape(B, Ho, Wo, F).transpose(0, 3, 1, 2))
    return out, (x.shape, xp.shape, cols, w, stride, pad)


def conv2d_backward(dout, cache):
    x_shape, xp_shape, cols, w, stride, pad = cache
    F, C, kh, kw = w.shape
    B, _, Ho, Wo = dout.shape
    d2 = np.ascontiguousarray(dout.transpose(0, 2, 3, 1)).reshape(-1, F)
    dw = (d2.T @ cols).reshape(w.shape)
    dcols = (d2 @ w.reshape(F, -1)).reshape(B, Ho, Wo, C, kh, kw).transpose(0, 3, 1, 2, 4, 5)
    dxp = np.zeros(xp_shape, dtype=dout.dtype)
    for i in range(kh):
        for j in range(kw):
            dxp[:, :, i:i + stride * (Ho - 1) + 1:stride, j:j + stride * (Wo - 1) + 1:stride] += dcols[..., i, j]
    H, W = x_shape[2], x_shape[3]
    dx = dxp[:, :, pad:pad + H, pad:pad + W] if pad else dxp
    return np.ascontiguousarray(dx), dw


def batchnorm_forward(x, gamma, beta, running_mean, running_var, train: bool):
    """Per-channel batch norm over (B, H, W).

    In train mode the running statistics are updated in place with
    momentum 0.9 (``run = 0.9 * run + 0.1 * batch``).
    """
    if train:
        if x.shape[0] < 2:
            raise ValueError("batch norm in train mode needs a batch of at least 2")
        mean = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))
        running_mean *= BN_MOMENTUM
        running_mean += (1.0 - BN_MOMENTUM) * mean
        running_var *= BN_MOMENTUM
        running_var += (1.0 - BN_MOMENTUM) * var
    else:
        mean, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
    out = gamma[None, :, None, None] * xhat + beta[None, :, None, None]
    return out, (xhat, gamma, inv_std, train)


def batchnorm_backward(dout, cache):
    xhat, gamma, inv_std, train = cache
    dgamma = (dout * xhat).sum(axis=(0, 2, 3))
    dbeta = dout.sum(axis=(0, 2, 3))
    dxhat = dout * gamma[None, :, None, None]
    if not train:
        return dxhat * inv_std[None, :, None, None], dgamma, dbeta
    n = xhat.shape[0] * xhat.shape[2] * xhat.shape[3]
    s1 = dxhat.sum(axis=(0, 2, 3))[None, :, None, None]
    s2 = (dxhat * xhat).sum(axis=(0, 2, 3))[None, :, None, None]
    dx = (inv_std[None, :, None, None] / n) * (n * dxhat - s1 - xhat * s2)
    return dx, dgamma, dbeta


def relu_forward(x):
    mask = x > 0
    return x * mask, mask


def relu_backward(dout, mask):
    return dout * mask


def dropout_forward(x, rate: float, train: bool, rng=None):
    """Inverted dropout; identity in eval mode or at rate 0."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not train or rate == 0.0:
        return x, None
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * keep, keep


def dropout_backward(dout, keep):
    return dout if keep is None else dout * keep


def dense_forward(x, w, b):
    return x @ w + b, x


def dense_backward(dout, x, w):
    return dout @ w.T, x.T @ dout, dout.sum(axis=0)


def mse_loss(pred, truth):
    """Mean squared error over every coordinate component and its gradient."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"prediction shape {pred.shape} != target shape {truth.shape}")
    if pred.size == 0:
        raise ValueError("empty batch")
    diff = pred - truth
    n = diff.size
    return float(np.sum(diff * diff) / n), 2.0 * diff / n
