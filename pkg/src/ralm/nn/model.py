"""Residual CNN regressor: stem -> residual blocks -> global average pool -> dense(2).

Block layout::

    main     = conv3x3(s) -> BN -> ReLU -> dropout -> conv3x3(1) -> BN
    shortcut = identity, or conv1x1(s) -> BN when stride or width changes
    out      = ReLU(main + shortcut)
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .layers import (batchnorm_backward, batchnorm_forward, conv2d_backward, conv2d_forward,
                     dense_backward, dense_forward, dropout_backward, dropout_forward,
                     relu_backward, relu_forward)
from ..rng import Purpose, generator


@dataclass(frozen=True)
class ResNetConfig:
    input_channels: int = 16
    input_height: int = 62
    input_width: int = 62
    stem_filters: int = 32
    num_blocks: int = 3
    block_strides: tuple = (1, 2, 2)
    channel_growth: float = 2.0
    dropout_rate: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "block_strides", tuple(int(s) for s in self.block_strides))
        if len(self.block_strides) != self.num_blocks:
            raise ValueError(f"need {self.num_blocks} block strides, got {self.block_strides}")
        if any(s not in (1, 2) for s in self.block_strides):
            raise ValueError(f"block strides must be 1 or 2, got {self.block_strides}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {self.dropout_rate}")
        for name in ("input_channels", "input_height", "input_width", "stem_filters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def block_filters(self) -> list[int]:
        """Output width of every block; width grows by ``channel_growth`` on strided blocks."""
        out, c = [], self.stem_filters
        for s in self.block_strides:
            if s == 2:
                c = int(round(c * self.channel_growth))
            out.append(c)
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["block_strides"] = list(self.block_strides)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ResNetConfig":
        return cls(**d)


@dataclass
class ModelState:
    params: dict = field(default_factory=dict)
    buffers: dict = field(default_factory=dict)
    step: int = 0

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    def copy(self) -> "ModelState":
        return ModelState({k: v.copy() for k, v in self.params.items()},
                          {k: v.copy() for k, v in self.buffers.items()}, self.step)


def _bn_init(state, name, c, dtype):
    state.params[f"{name}.gamma"] = np.ones(c, dtype=dtype)
    state.params[f"{name}.beta"] = np.zeros(c, dtype=dtype)
    state.buffers[f"{name}.mean"] = np.zeros(c, dtype=dtype)
    state.buffers[f"{name}.var"] = np.ones(c, dtype=dtype)


def _he(rng, shape, fan_in, dtype):
    return (rng.standard_normal(shape) * math.sqrt(2.0 / fan_in)).astype(dtype)


def init_model(cfg: ResNetConfig, seed: int = 0, dtype=np.float64) -> ModelState:
    """He-normal convolution/dense weights, BN scale 1 and shift 0, zero dense bias."""
    rng = generator(seed, Purpose.INIT, 0)
    st = ModelState()
    c_in = cfg.input_channels
    st.params["stem.conv.w"] = _he(rng, (cfg.stem_filters, c_in, 3, 3), c_in * 9, dtype)
    _bn_init(st, "stem.bn", cfg.stem_filters, dtype)
    c = cfg.stem_filters
    for i, (s, f) in enumerate(zip(cfg.block_strides, cfg.block_filters())):
        p = f"block{i}"
        st.params[f"{p}.conv1.w"] = _he(rng, (f, c, 3, 3), c * 9, dtype)
        _bn_init(st, f"{p}.bn1", f, dtype)
        st.params[f"{p}.conv2.w"] = _he(rng, (f, f, 3, 3), f * 9, dtype)
        _bn_init(st, f"{p}.bn2", f, dtype)
        if s != 1 or f != c:
            st.params[f"{p}.proj.w"] = _he(rng, (f, c, 1, 1), c, dtype)
            _bn_init(st, f"{p}.bnp", f, dtype)
        c = f
    st.params["dense.w"] = _he(rng, (c, 2), c, dtype)
    st.params["dense.b"] = np.zeros(2, dtype=dtype)
    return st


def _bn_fwd(state, name, x, train):
    return batchnorm_forward(x, state.params[f"{name}.gamma"], state.params[f"{name}.beta"],
                             state.buffers[f"{name}.mean"], state.buffers[f"{name}.var"], train)


def _bn_bwd(grads, name, d, cache):
    dx, dg, db = batchnorm_backward(d, cache)
    grads[f"{name}.gamma"] = dg
    grads[f"{name}.beta"] = db
    return dx


def residual_block_forward(state, prefix, x, stride, dropout_rate, train, rng=None):
    p = state.params
    h, c_conv1 = conv2d_forward(x, p[f"{prefix}.conv1.w"], stride)
    h, c_bn1 = _bn_fwd(state, f"{prefix}.bn1", h, train)
    h, c_relu1 = relu_forward(h)
    h, c_drop = dropout_forward(h, dropout_rate, train, rng)
    h, c_conv2 = conv2d_forward(h, p[f"{prefix}.conv2.w"], 1)
    h, c_bn2 = _bn_fwd(state, f"{prefix}.bn2", h, train)
    if f"{prefix}.proj.w" in p:
        sc, c_proj = conv2d_forward(x, p[f"{prefix}.proj.w"], stride, 0)
        sc, c_bnp = _bn_fwd(state, f"{prefix}.bnp", sc, train)
    else:
        if x.shape != h.shape:
            raise ValueError(f"identity shortcut shape {x.shape} != main path {h.shape}")
        sc, c_proj, c_bnp = x, None, None
    out, c_relu = relu_forward(h + sc)
    return out, (c_conv1, c_bn1, c_relu1, c_drop, c_conv2, c_bn2, c_proj, c_bnp, c_relu)


def residual_block_backward(prefix, dout, cache, grads):
    c_conv1, c_bn1, c_relu1, c_drop, c_conv2, c_bn2, c_proj, c_bnp, c_relu = cache
    d = relu_backward(dout, c_relu)
    if c_proj is not None:
        ds = _bn_bwd(grads, f"{prefix}.bnp", d, c_bnp)
        dx_sc, grads[f"{prefix}.proj.w"] = conv2d_backward(ds, c_proj)
    else:
        dx_sc = d
    dh = _bn_bwd(grads, f"{prefix}.bn2", d, c_bn2)
    dh, grads[f"{prefix}.conv2.w"] = conv2d_backward(dh, c_conv2)
    dh = dropout_backward(dh, c_drop)
    dh = relu_backward(dh, c_relu1)
    dh = _bn_bwd(grads, f"{prefix}.bn1", dh, c_bn1)
    dx, grads[f"{prefix}.conv1.w"] = conv2d_backward(dh, c_conv1)
    return dx + dx_sc


def forward(state: ModelState, cfg: ResNetConfig, batch, train: bool = False, rng=None):
    """Return ``(predictions (B, 2), cache)``.

    ``rng`` supplies dropout masks in train mode; it may be omitted when
    the dropout rate is 0 or in eval mode.
    """
    x = np.asarray(batch, dtype=state.dtype)
    expected = (cfg.input_channels, cfg.input_height, cfg.input_width)
    if x.ndim != 4 or x.shape[1:] != expected:
        raise ValueError(f"batch shape {x.shape} does not match (B, {', '.join(map(str, expected))})")
    if train and cfg.dropout_rate > 0 and rng is None:
        raise ValueError("train-mode dropout needs an rng")
    p = state.params
    h, c_stem = conv2d_forward(x, p["stem.conv.w"], 1)
    h, c_stem_bn = _bn_fwd(state, "stem.bn", h, train)
    h, c_stem_relu = relu_forward(h)
    block_caches = []
    for i, s in enumerate(cfg.block_strides):
        h, c = residual_block_forward(state, f"block{i}", h, s, cfg.dropout_rate, train, rng)
        block_caches.append(c)
    spatial = h.shape[2:]
    pooled = h.mean(axis=(2, 3))
    pred, c_dense = dense_forward(pooled, p["dense.w"], p["dense.b"])
    return pred, (c_stem, c_stem_bn, c_stem_relu, block_caches, spatial, c_dense)


def backward(state: ModelState, cfg: ResNetConfig, dpred, cache) -> dict:
    c_stem, c_stem_bn, c_stem_relu, block_caches, spatial, c_dense = cache
    grads = {}
    dpooled, grads["dense.w"], grads["dense.b"] = dense_backward(dpred, c_dense, state.params["dense.w"])
    H, W = spatial
    dh = np.broadcast_to(dpooled[:, :, None, None] / (H * W), dpooled.shape + (H, W))
    for i in reversed(range(len(block_caches))):
        dh = residual_block_backward(f"block{i}", dh, block_caches[i], grads)
    dh = relu_backward(dh, c_stem_relu)
    dh = _bn_bwd(grads, "stem.bn", dh, c_stem_bn)
    _, grads["stem.conv.w"] = conv2d_backward(dh, c_stem)
    return grads


def predict(state: ModelState, cfg: ResNetConfig, data, batch_size: int = 64) -> np.ndarray:
    """Eval-mode predictions for a (S, C, H, W) array, in fixed-size chunks."""
    out = [forward(state, cfg, data[i:i + batch_size], train=False)[0]
           for i in range(0, len(data), batch_size)]
    return np.concatenate(out, axis=0) if out else np.zeros((0, 2))
