"""Seeded random search over a discrete hyperparameter grid.

Configurations are drawn without replacement from a seeded permutation of
the full Cartesian product; repeats only occur once every configuration
has been tried.  Trial ``i`` trains with seed ``mix(seed, i)``.  The best
trial has the lowest validation loss, ties going to the earlier trial.
"""
import csv
import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import NumericalError
from .optim import OptimizerKind, TrainConfig
from .rng import Purpose, generator, stream_key

log = logging.getLogger(__name__)

TRIALS_HEADER = ["trial", "optimizer", "learning_rate", "batch_size", "dropout_rate", "val_loss", "val_rmse_m"]

@dataclass(frozen=True)
class SearchSpace:
    optimizers: tuple = (OptimizerKind.ADAM, OptimizerKind.ADAMAX, OptimizerKind.ADAGRAD, OptimizerKind.RMSPROP)
    learning_rates: tuple = (0.01, 0.001, 0.0005, 0.0001)
    batch_sizes: tuple = (8, 16, 32, 64)
    dropout_rates: tuple = (0.2, 0.3, 0.4, 0.5)

    def __post_init__(self):
        for name in ("optimizers", "learning_rates", "batch_sizes", "dropout_rates"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"search space list {name!r} is empty")

    def configurations(self) -> list[tuple]:
        return list(itertools.product(self.optimizers, self.learning_rates, self.batch_sizes, self.dropout_rates))

    def __len__(self):
        return len(self.optimizers) * len(self.learning_rates) * len(self.batch_sizes) * len(self.dropout_rates)

    def contains(self, optimizer, lr, batch_size, dropout) -> bool:
        return (OptimizerKind.parse(optimizer) in self.optimizers and lr in self.learning_rates
                and batch_size in self.batch_sizes and dropout in self.dropout_rates)

@dataclass
class TrialRecord:
    trial: int
    config: TrainConfig
    val_loss: float

    @property
    def val_rmse(self) -> float:
        return math.sqrt(self.val_loss) if math.isfinite(self.val_loss) else math.inf

@dataclass
class SearchResult:
    trials: list = field(default_factory=list)

    @property
    def best(self) -> TrialRecord:
        return select_best(self.trials)

    def write_csv(self, path) -> None:
        write_trials_csv(self.trials, path)

def select_best(records) -> TrialRecord:
    if not records:
        raise ValueError("no trials recorded")
    return min(records, key=lambda r: (r.val_loss, r.trial))

def sample_configurations(space: SearchSpace, n_trials: int, seed: int) -> list[tuple]:
    configs = space.configurations()
    out, epoch = [], 0
    while len(out) < n_trials:
        perm = generator(seed, Purpose.SEARCH, epoch).permutation(len(configs))
        out.extend(configs[j] for j in perm[: n_trials - len(out)])
        epoch += 1
    return out

def random_search(run_trial, space: SearchSpace = SearchSpace(), n_trials: int = 12, seed: int = 0,
                  base: TrainConfig = None, epochs: int = 15) -> SearchResult:
    """Run ``n_trials`` trainings; ``run_trial(cfg)`` returns the best validation loss.

    A trial whose training diverges is recorded with infinite loss and
    the search continues.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    base = base or TrainConfig()
    result = SearchResult()
    for i, (opt, lr, bs, dr) in enumerate(sample_configurations(space, n_trials, seed), start=1):
        trial_seed = stream_key(seed, Purpose.TRIAL, i) & 0x7FFFFFFF
        cfg = replace(base, optimizer=opt, learning_rate=lr, batch_size=bs, dropout_rate=dr,
                      epochs=epochs, seed=trial_seed)
        try:
            loss = float(run_trial(cfg))
            if not math.isfinite(loss):
                loss = math.inf
        except NumericalError as exc:
            log.warning("trial %d diverged: %s", i, exc)
            loss = math.inf
        result.trials.append(TrialRecord(i, cfg, loss))
        log.info("trial %d %s lr=%g bs=%d dropout=%g -> %g", i, opt.value, lr, bs, dr, loss)
    return result

def write_trials_csv(records, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRIALS_HEADER)
        for r in sorted(records, key=lambda r: r.trial):
            c = r.config
            w.writerow([r.trial, c.optimizer.value, repr(c.learning_rate), c.batch_size, repr(c.dropout_rate),
                        repr(r.val_loss), repr(r.val_rmse)])

def read_trials_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["trial"] = int(r["trial"])
        r["learning_rate"] = float(r["learning_rate"])
        r["batch_size"] = int(r["batch_size"])
        r["dropout_rate"] = float(r["dropout_rate"])
        r["val_loss"] = float(r["val_loss"])
        r["val_rmse_m"] = float(r["val_rmse_m"])
    return rows

