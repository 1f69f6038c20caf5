"""End-to-end steps shared by the CLI and the tests."""
import math

import numpy as np

from .channel import simulate_measurements
from .dataio.datasets import MeasurementSet, TensorSet, grid_to_meta
from .dataio.scenario import Scenario
from .errors import DataError, NoInformationError
from .estimators import argmax_position, weighted_centroid
from .evaluation import metrics_summary
from .likelihood import CHANNEL_ORDER, KnownTerms, ObservationSigmas, fuse_log, measurement_log_maps, stack_sample
from .nn import init_model, predict
from .nn.model import ResNetConfig
from .optim import TrainConfig, split_dataset, train
from .trajectory import generate_boarding_walk, load_positions_csv, sample_uniform_positions

NAN = float("nan")


def tag_states(scenario: Scenario):
    p = scenario.positions
    if p.source == "uniform":
        return sample_uniform_positions(scenario.cabin, p.count, scenario.seed)
    if p.source == "boarding":
        return generate_boarding_walk(scenario.cabin, p.n_passengers, p.step_length, scenario.seed)
    return load_positions_csv(p.path, scenario.cabin)


def _meta(scenario: Scenario) -> dict:
    return {"scenario": scenario.to_dict(), "scenario_digest": scenario.digest(), "seed": scenario.seed,
            "grid": grid_to_meta(scenario.grid),
            "observation": {"sigma_r": scenario.observation.sigma_r,
                            "sigma_theta": scenario.observation.sigma_theta},
            "anchor_ids": [a.id for a in scenario.sorted_anchors]}


def simulate(scenario: Scenario) -> MeasurementSet:
    """Tag positions plus one measurement per (state, anchor).

    State ``i`` draws from substream index ``i``, so the output depends
    only on the scenario, never on iteration order.
    """
    states = tag_states(scenario)
    anchors = scenario.sorted_anchors
    S, K = len(states), len(anchors)
    ranges = np.full((S, K), NAN)
    angles = np.full((S, K), NAN)
    conds = np.zeros((S, K), dtype=np.int64)
    for i, st in enumerate(states):
        ms = simulate_measurements(st.position, anchors, scenario.conditions, scenario.error_model,
                                   scenario.seed, i, scenario.noise_free, scenario.anchor_conditions)
        for k, m in enumerate(ms):
            if m.range is not None:
                ranges[i, k] = m.range
            if m.angle is not None:
                angles[i, k] = m.angle
            conds[i, k] = m.condition.code
    positions = np.array([s.position for s in states], dtype=float).reshape(S, 2)
    return MeasurementSet(positions, np.array([s.tag_id for s in states], dtype=np.int64),
                          np.array([s.time_step for s in states], dtype=np.int64), anchors,
                          ranges, angles, conds, _meta(scenario))


def build_tensors(mset: MeasurementSet, sigmas: ObservationSigmas = None, dtype=np.float32) -> TensorSet:
    grid = mset.grid
    sigmas = sigmas or mset.sigmas
    known = KnownTerms(grid, mset.anchors)
    S, K = len(mset), len(mset.anchors)
    tensors = np.zeros((S, 2 * K, grid.rows, grid.cols), dtype=dtype)
    mask = np.zeros((S, K, 2), dtype=bool)
    for i in range(S):
        t = stack_sample(mset.measurements(i), grid, sigmas, mset.positions[i], known=known)
        tensors[i] = t.values
        mask[i] = t.mask
    meta = dict(mset.meta)
    meta.update({"channel_order": CHANNEL_ORDER,
                 "observation": {"sigma_r": sigmas.sigma_r, "sigma_theta": sigmas.sigma_theta}})
    return TensorSet(tensors, mset.positions.copy(), mask, mset.tag_ids.copy(), mset.time_steps.copy(), meta)


def locate(mset: MeasurementSet, method: str = "argmax", sigmas: ObservationSigmas = None) -> np.ndarray:
    """Classical estimates, shape (S, 2); NaN rows where every measurement failed."""
    if method not in ("argmax", "centroid"):
        raise ValueError(f"unknown method {method!r}")
    grid = mset.grid
    sigmas = sigmas or mset.sigmas
    known = KnownTerms(grid, mset.anchors)
    out = np.full((len(mset), 2), NAN)
    for i in range(len(mset)):
        maps = measurement_log_maps(mset.measurements(i), known, sigmas)
        if not maps:
            continue
        field = fuse_log(maps)
        try:
            if method == "argmax":
                out[i] = argmax_position(field, grid, log_domain=True)[0]
            else:
                out[i] = weighted_centroid(field, grid, log_domain=True)
        except NoInformationError:
            continue
    return out


def model_config_for(tset: TensorSet, **overrides) -> ResNetConfig:
    _, c, h, w = tset.tensors.shape
    return ResNetConfig(input_channels=c, input_height=h, input_width=w, **overrides)


def fit(tset: TensorSet, model_cfg: ResNetConfig, cfg: TrainConfig, checkpoint_path=None,
        save_checkpoint=None, init_seed=None):
    """Split, initialise and train. Returns ``(report, best_state, (train_idx, test_idx))``."""
    tr, te = split_dataset(len(tset), cfg.test_fraction, cfg.seed)
    state = init_model(model_cfg, cfg.seed if init_seed is None else init_seed, cfg.dtype)
    x = tset.tensors
    report, best = train(state, model_cfg, cfg, x[tr], tset.targets[tr], x[te], tset.targets[te],
                         checkpoint_path, save_checkpoint)
    return report, best, (tr, te)


def evaluate_model(state, model_cfg: ResNetConfig, tset: TensorSet, indices=None):
    """Eval-mode predictions and metrics over ``indices`` (default: all samples)."""
    if tset.tensors.shape[1:] != (model_cfg.input_channels, model_cfg.input_height, model_cfg.input_width):
        raise DataError(f"dataset samples {tset.tensors.shape[1:]} do not fit the model input "
                        f"({model_cfg.input_channels}, {model_cfg.input_height}, {model_cfg.input_width})")
    idx = np.arange(len(tset)) if indices is None else np.asarray(indices)
    pred = predict(state, model_cfg, tset.tensors[idx]).astype(np.float64)
    return pred, metrics_summary(pred, tset.targets[idx])


def centroid_baseline_error(tset: TensorSet, train_idx, test_idx) -> float:
    """Median test error of always predicting the training-set centroid."""
    c = tset.targets[train_idx].mean(axis=0)
    err = np.hypot(*(tset.targets[test_idx] - c).T)
    return float(np.median(err)) if err.size else math.nan
