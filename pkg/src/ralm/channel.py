"""Stochastic range/angle measurement generation.

Each measurement attempt first draws a channel condition (failure is
checked first, then LOS / NLOS / outlier), then adds condition-dependent
errors to the true range and bearing:

=========  ===========================  ==================
condition  range error                  angle error
=========  ===========================  ==================
LOS        Normal(0, sigma_r**2)        Normal(0, sigma_theta**2)
NLOS       LogNormal(mu, sigma)         Uniform(-pi, pi)
Outlier    Uniform(-d, d)               Uniform(-pi, pi)
Failure    no value                     no value
=========  ===========================  ==================

LogNormal parameters are those of the underlying normal in log space.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DataError
from .geometry import Anchor, true_bearing, true_range, wrap_angle
from .rng import Purpose, generator, pair_index


class ChannelCondition(Enum):
    LOS = "LOS"
    NLOS = "NLOS"
    OUTLIER = "Outlier"
    FAILURE = "Failure"

    @property
    def code(self) -> int:
        return _CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "ChannelCondition":
        return _FROM_CODE[int(code)]


_CODES = {ChannelCondition.LOS: 0, ChannelCondition.NLOS: 1,
          ChannelCondition.OUTLIER: 2, ChannelCondition.FAILURE: 3}
_FROM_CODE = {v: k for k, v in _CODES.items()}


@dataclass(frozen=True)
class ConditionModel:
    p_los: float = 0.70
    p_nlos: float = 0.20
    p_outlier: float = 0.05
    p_failure: float = 0.05

    def __post_init__(self):
        ps = (self.p_los, self.p_nlos, self.p_outlier, self.p_failure)
        if any(not (p >= 0.0) for p in ps):
            raise DataError(f"condition probabilities must be non-negative, got {ps}")
        if abs(sum(ps) - 1.0) > 1e-12:
            raise DataError(f"condition probabilities must sum to 1, got {sum(ps)!r}")


@dataclass(frozen=True)
class ErrorModelParams:
    sigma_r_los: float = 0.3
    sigma_theta_los: float = math.radians(3.0)
    nlos_mu: float = 0.8
    nlos_sigma: float = 1.07

    def __post_init__(self):
        vals = (self.sigma_r_los, self.sigma_theta_los, self.nlos_mu, self.nlos_sigma)
        if any(not (v > 0.0) for v in vals):
            raise DataError(f"error model parameters must be strictly positive, got {vals}")


@dataclass(frozen=True)
class Measurement:
    anchor_id: int
    range: Optional[float]
    angle: Optional[float]
    condition: ChannelCondition

    @property
    def failed(self) -> bool:
        return self.range is None and self.angle is None


def draw_condition(model: ConditionModel, rng: np.random.Generator) -> ChannelCondition:
    u = rng.random()
    if u < model.p_failure:
        return ChannelCondition.FAILURE
    u -= model.p_failure
    if u < model.p_los:
        return ChannelCondition.LOS
    u -= model.p_los
    if u < model.p_nlos:
        return ChannelCondition.NLOS
    if model.p_outlier > 0.0:
        return ChannelCondition.OUTLIER
    # rounding slack in the cumulative sum; fall back to the last non-empty class
    for cond, p in ((ChannelCondition.NLOS, model.p_nlos), (ChannelCondition.LOS, model.p_los)):
        if p > 0.0:
            return cond
    return ChannelCondition.FAILURE


def _reject_failure(cond):
    if cond is ChannelCondition.FAILURE:
        raise ValueError("no error model for a failed measurement")


def sample_range_error(cond: ChannelCondition, d: float, params: ErrorModelParams,
                       rng: np.random.Generator, size=None):
    _reject_failure(cond)
    if d < 0:
        raise ValueError(f"true distance must be non-negative, got {d}")
    if cond is ChannelCondition.LOS:
        return rng.normal(0.0, params.sigma_r_los, size)
    if cond is ChannelCondition.NLOS:
        return rng.lognormal(params.nlos_mu, params.nlos_sigma, size)
    return rng.uniform(-d, d, size)


def sample_angle_error(cond: ChannelCondition, params: ErrorModelParams,
                       rng: np.random.Generator, size=None):
    _reject_failure(cond)
    if cond is ChannelCondition.LOS:
        return rng.normal(0.0, params.sigma_theta_los, size)
    return rng.uniform(-math.pi, math.pi, size)


def simulate_measurement(tag, anchor: Anchor, cmodel: ConditionModel, params: ErrorModelParams,
                         seed: int, index: int, noise_free: bool = False) -> Measurement:
    """Simulate one tag <-> anchor observation.

    Condition, range noise and angle noise each come from their own
    substream keyed by ``(seed, purpose, index << 20 | anchor.id)``, so a
    measurement depends only on its coordinates and never on evaluation
    order.  ``noise_free`` zeroes both error terms (the condition is still
    drawn) and exists for oracle tests.
    """
    key = pair_index(index, anchor.id)
    cond = draw_condition(cmodel, generator(seed, Purpose.CONDITION, key))
    if cond is ChannelCondition.FAILURE:
        return Measurement(anchor.id, None, None, cond)
    d = true_range(tag, anchor.position)
    theta = true_bearing(tag, anchor.position)
    if noise_free:
        eps_r = eps_a = 0.0
    else:
        eps_r = float(sample_range_error(cond, d, params, generator(seed, Purpose.RANGE_NOISE, key)))
        eps_a = float(sample_angle_error(cond, params, generator(seed, Purpose.ANGLE_NOISE, key)))
    return Measurement(anchor.id, max(0.0, d + eps_r), wrap_angle(theta + eps_a), cond)


def simulate_measurements(tag, anchors, cmodel, params, seed, index, noise_free=False,
                          anchor_models=None) -> list[Measurement]:
    """One measurement per anchor, ordered by anchor id.

    ``anchor_models`` optionally maps anchor id to a per-anchor
    :class:`ConditionModel` overriding ``cmodel``.
    """
    anchor_models = anchor_models or {}
    return [simulate_measurement(tag, a, anchor_models.get(a.id, cmodel), params, seed, index, noise_free)
            for a in sorted(anchors, key=lambda a: a.id)]
