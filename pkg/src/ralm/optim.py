"""Optimizer update rules and the training loop.

Training keeps the parameters of the epoch with the lowest validation
loss (strict improvement) and returns those, not the final epoch's.
Losses are mean squared errors over every coordinate component, in
square meters. The matching RMSE in meters is reported next to them.
"""
import csv
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataError, NumericalError
from .nn import backward, forward, mse_loss, predict
from .nn.model import ModelState, ResNetConfig
from .rng import Purpose, generator

log = logging.getLogger(__name__)

BETA1 = 0.9
BETA2 = 0.999
RHO = 0.9
EPS = 1e-8


class OptimizerKind(str, Enum):
    ADAM = "Adam"
    ADAMAX = "Adamax"
    ADAGRAD = "Adagrad"
    RMSPROP = "RMSprop"

    @classmethod
    def parse(cls, name) -> "OptimizerKind":
        if isinstance(name, cls):
            return name
        for k in cls:
            if k.value.lower() == str(name).lower():
                return k
        raise ValueError(f"unknown optimizer {name!r}; choose from {[k.value for k in cls]}")


@dataclass(frozen=True)
class TrainConfig:
    optimizer: OptimizerKind = OptimizerKind.ADAM
    learning_rate: float = 1e-3
    batch_size: int = 32
    dropout_rate: float = 0.2
    epochs: int = 50
    test_fraction: float = 0.25
    seed: int = 0
    precision: str = "float64"

    def __post_init__(self):
        object.__setattr__(self, "optimizer", OptimizerKind.parse(self.optimizer))
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.precision not in ("float64", "float32"):
            raise ValueError("precision must be 'float64' or 'float32'")

    @property
    def dtype(self):
        return np.dtype(self.precision)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["optimizer"] = self.optimizer.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class TrainReport:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = 0
    checkpoint_path: Optional[str] = None

    @property
    def val_rmse(self) -> list:
        return [math.sqrt(v) for v in self.val_loss]

    @property
    def best_val_loss(self) -> float:
        return self.val_loss[self.best_epoch - 1] if self.best_epoch else math.inf

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "train_loss", "val_loss", "val_rmse_m"])
            for i, (tl, vl) in enumerate(zip(self.train_loss, self.val_loss), start=1):
                w.writerow([i, repr(tl), repr(vl), repr(math.sqrt(vl))])


def new_optimizer_state(params: dict) -> dict:
    return {"m": {k: np.zeros_like(v) for k, v in params.items()},
            "v": {k: np.zeros_like(v) for k, v in params.items()}}


def optimizer_step(kind, opt_state: dict, params: dict, grads: dict, lr: float, t: int) -> None:
    """Apply one update in place.  ``t`` is the 1-based step count.

    ``opt_state["m"]`` holds first moments (Adam, Adamax); ``opt_state["v"]``
    holds second moments, the Adamax infinity norm, or the Adagrad sum of
    squares.
    """
    kind = OptimizerKind.parse(kind)
    if t < 1:
        raise ValueError("step count t starts at 1")
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for {name!r} at step {t}")
    for name, g in grads.items():
        theta = params[name]
        m = opt_state["m"][name]
        v = opt_state["v"][name]
        if kind is OptimizerKind.ADAM:
            m *= BETA1
            m += (1 - BETA1) * g
            v *= BETA2
            v += (1 - BETA2) * g * g
            m_hat = m / (1 - BETA1 ** t)
            v_hat = v / (1 - BETA2 ** t)
            theta -= lr * m_hat / (np.sqrt(v_hat) + EPS)
        elif kind is OptimizerKind.ADAMAX:
            m *= BETA1
            m += (1 - BETA1) * g
            np.maximum(BETA2 * v, np.abs(g), out=v)
            theta -= (lr / (1 - BETA1 ** t)) * m / (v + EPS)
        elif kind is OptimizerKind.ADAGRAD:
            v += g * g
            theta -= lr * g / (np.sqrt(v) + EPS)
        else:
            v *= RHO
            v += (1 - RHO) * g * g
            theta -= lr * g / (np.sqrt(v) + EPS)


def split_dataset(n_samples: int, test_fraction: float, seed: int):
    """Seeded shuffle, then split indices into (train, test)."""
    if n_samples < 4:
        raise DataError(f"need at least 4 samples to split, got {n_samples}")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    n_test = min(max(int(round(n_samples * test_fraction)), 1), n_samples - 1)
    perm = generator(seed, Purpose.SPLIT, 0).permutation(n_samples)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def _batches(order, batch_size):
    chunks = [order[i:i + batch_size] for i in range(0, len(order), batch_size)]
    # batch norm cannot train on a single sample; fold a lone tail into the previous batch
    if len(chunks) > 1 and len(chunks[-1]) < 2:
        chunks[-2] = np.concatenate([chunks[-2], chunks.pop()])
    return chunks


def evaluate_loss(state, model_cfg, x, y, batch_size=64) -> float:
    pred = predict(state, model_cfg, x, batch_size)
    return mse_loss(pred.astype(np.float64), np.asarray(y, dtype=np.float64))[0]


def train(state: ModelState, model_cfg: ResNetConfig, cfg: TrainConfig, x_train, y_train, x_val, y_val,
          checkpoint_path=None, save_checkpoint=None):
    """Train in place and return ``(TrainReport, best ModelState)``.

    ``save_checkpoint(state, report, path)`` is called whenever the
    validation loss strictly improves and ``checkpoint_path`` is set.
    """
    if len(x_train) < 2:
        raise DataError("need at least 2 training samples")
    if len(x_val) < 1:
        raise DataError("validation set is empty")
    model_cfg = replace(model_cfg, dropout_rate=cfg.dropout_rate)
    y_train = np.asarray(y_train, dtype=state.dtype)
    opt_state = new_optimizer_state(state.params)
    report = TrainReport(checkpoint_path=str(checkpoint_path) if checkpoint_path else None)
    best_state = state.copy()
    best = math.inf
    for epoch in range(1, cfg.epochs + 1):
        order = generator(cfg.seed, Purpose.SHUFFLE, epoch).permutation(len(x_train))
        drop_rng = generator(cfg.seed, Purpose.DROPOUT, epoch)
        total, count = 0.0, 0
        for idx in _batches(order, cfg.batch_size):
            pred, cache = forward(state, model_cfg, x_train[idx], train=True, rng=drop_rng)
            loss, dpred = mse_loss(pred, y_train[idx])
            if not math.isfinite(loss):
                raise NumericalError(f"training loss diverged at epoch {epoch}")
            grads = backward(state, model_cfg, dpred, cache)
            state.step += 1
            optimizer_step(cfg.optimizer, opt_state, state.params, grads, cfg.learning_rate, state.step)
            total += loss * len(idx)
            count += len(idx)
        val = evaluate_loss(state, model_cfg, x_val, y_val)
        if not math.isfinite(val):
            raise NumericalError(f"validation loss diverged at epoch {epoch}")
        report.train_loss.append(total / count)
        report.val_loss.append(val)
        if val < best:
            best = val
            report.best_epoch = epoch
            best_state = state.copy()
            if checkpoint_path and save_checkpoint:
                save_checkpoint(best_state, report, checkpoint_path)
        log.info("epoch %d train %.6g val %.6g", epoch, total / count, val)
    return report, best_state
