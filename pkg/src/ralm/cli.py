"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical failure.
"""
import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import read_checkpoint, read_dataset, write_checkpoint, write_dataset
from .dataio.datasets import MeasurementSet, TensorSet, require_kind
from .dataio.scenario import load_scenario
from .errors import DataError, NumericalError
from .evaluation import ecdf, euclidean_errors, residual_histograms, write_ecdf_csv, write_metrics
from .hpo import SearchSpace, random_search
from .likelihood import ObservationSigmas
from .optim import TrainConfig, split_dataset
from . import pipeline

log = logging.getLogger("ralm")

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_MODEL_KEYS = {"stem_filters", "num_blocks", "block_strides", "channel_growth"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_train_config(path, seed=None):
    """Read a training config JSON: TrainConfig fields plus an optional ``model`` object."""
    d = {}
    if path:
        try:
            d = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(d, dict):
            raise DataError(f"{path}: training config must be a JSON object")
    model = d.pop("model", {}) or {}
    extra = set(model) - _MODEL_KEYS
    if extra:
        raise DataError(f"unknown model keys {sorted(extra)}; allowed {sorted(_MODEL_KEYS)}")
    try:
        cfg = TrainConfig(**d)
    except (TypeError, ValueError) as exc:
        raise DataError(f"invalid training config: {exc}") from None
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg, model


def _model_cfg(tset, overrides, dropout):
    try:
        return pipeline.model_config_for(tset, dropout_rate=dropout, **overrides)
    except (TypeError, ValueError) as exc:
        raise DataError(f"invalid model config: {exc}") from None


def _read(path, cls):
    return require_kind(read_dataset(path), cls, path)


def cmd_simulate(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    mset = pipeline.simulate(scenario)
    write_dataset(mset, args.out)
    log.info("wrote %d states x %d anchors to %s", len(mset), len(mset.anchors), args.out)


def cmd_gridmaps(args):
    mset = _read(args.inp, MeasurementSet)
    sig = mset.sigmas
    sigmas = ObservationSigmas(args.sigma_r if args.sigma_r is not None else sig.sigma_r,
                               args.sigma_theta if args.sigma_theta is not None else sig.sigma_theta)
    tset = pipeline.build_tensors(mset, sigmas)
    write_dataset(tset, args.out)
    log.info("wrote tensors %s to %s", tset.tensors.shape, args.out)


def cmd_train(args):
    tset = _read(args.data, TensorSet)
    cfg, model_over = load_train_config(args.config, args.seed)
    if args.epochs is not None:
        cfg = replace(cfg, epochs=args.epochs)
    model_cfg = _model_cfg(tset, model_over, cfg.dropout_rate)

    def save(state, report, path):
        write_checkpoint(state, model_cfg, path, cfg, report)

    report, best, (tr, te) = pipeline.fit(tset, model_cfg, cfg, args.out, save)
    if args.report:
        report.write_csv(args.report)
    print(f"best epoch {report.best_epoch}: val_loss {report.best_val_loss:.6g} m^2 "
          f"(rmse {math.sqrt(report.best_val_loss):.4g} m); checkpoint {args.out}")


def cmd_search(args):
    tset = _read(args.data, TensorSet)
    base, model_over = load_train_config(args.config)
    model_cfg = _model_cfg(tset, model_over, base.dropout_rate)

    def run_trial(cfg):
        report, _, _ = pipeline.fit(tset, replace(model_cfg, dropout_rate=cfg.dropout_rate), cfg)
        return report.best_val_loss

    seed = 0 if args.seed is None else args.seed
    result = random_search(run_trial, SearchSpace(), args.trials, seed, base, args.epochs)
    result.write_csv(args.out)
    b = result.best
    print(f"best trial {b.trial}: {b.config.optimizer.value} lr={b.config.learning_rate} "
          f"batch={b.config.batch_size} dropout={b.config.dropout_rate} val_loss={b.val_loss:.6g}")


def cmd_evaluate(args):
    tset = _read(args.data, TensorSet)
    state, model_cfg, train_cfg, _ = read_checkpoint(args.checkpoint)
    idx = None
    if args.subset == "test":
        if train_cfg is None:
            raise DataError("checkpoint carries no training config; cannot rebuild the test split")
        _, idx = split_dataset(len(tset), train_cfg.test_fraction, train_cfg.seed)
    pred, metrics = pipeline.evaluate_model(state, model_cfg, tset, idx)
    truth = tset.targets if idx is None else tset.targets[idx]
    metrics["subset"] = args.subset
    write_metrics(metrics, args.out_metrics)
    write_ecdf_csv(ecdf(euclidean_errors(pred, truth)), args.out_ecdf)
    print(json.dumps(metrics, sort_keys=True))


def cmd_locate(args):
    mset = _read(args.inp, MeasurementSet)
    est = pipeline.locate(mset, args.method)
    with Path(args.out).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tag_id", "time_step", "x_true", "y_true", "x_est", "y_est", "error_m"])
        for i in range(len(mset)):
            xt, yt = mset.positions[i]
            xe, ye = est[i]
            err = math.hypot(xe - xt, ye - yt)
            w.writerow([int(mset.tag_ids[i]), int(mset.time_steps[i]), repr(float(xt)), repr(float(yt)),
                        repr(float(xe)), repr(float(ye)), repr(err)])
    ok = np.isfinite(est[:, 0])
    if ok.any():
        errs = np.hypot(*(est[ok] - mset.positions[ok]).T)
        print(f"located {ok.sum()}/{len(mset)}; median error {np.median(errs):.4g} m")


def residual_paths(out) -> dict:
    out = Path(out)
    return {k: out.with_name(f"{out.stem}_{k}{out.suffix or '.csv'}") for k in ("range", "angle")}


def cmd_residuals(args):
    mset = _read(args.inp, MeasurementSet)
    truths = [tuple(p) for p in mset.positions]
    meas = [mset.measurements(i) for i in range(len(mset))]
    hists = residual_histograms(meas, truths, mset.anchors, args.bins,
                                tuple(args.range_span) if args.range_span else None)
    for kind, path in residual_paths(args.out).items():
        if kind in hists:
            hists[kind].write_csv(path)
            print(f"{kind} residuals: {int(hists[kind].counts.sum())} values -> {path}")


def build_parser():
    # global flags are accepted before or after the subcommand; SUPPRESS keeps the
    # subcommand copy from overwriting a value given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="override the seed stored in the input config")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = _Parser(prog="ralm", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None, help="override the seed stored in the input config")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"ralm {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="positions + measurements dataset")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("gridmaps", parents=[common], help="stacked likelihood tensors")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--sigma-r", type=float, default=None, help="range kernel width in meters")
    s.add_argument("--sigma-theta", type=float, default=None, help="angle kernel width in radians")
    s.set_defaults(func=cmd_gridmaps)

    s = sub.add_parser("train", parents=[common], help="train the residual network")
    s.add_argument("--data", required=True)
    s.add_argument("--config", default=None, help="training config JSON")
    s.add_argument("--out", required=True, help="best checkpoint path")
    s.add_argument("--report", default=None, help="loss curve CSV")
    s.add_argument("--epochs", type=int, default=None)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("search", parents=[common], help="random hyperparameter search")
    s.add_argument("--data", required=True)
    s.add_argument("--trials", type=int, default=12)
    s.add_argument("--epochs", type=int, default=15, help="epoch budget per trial (50 matches the full protocol)")
    s.add_argument("--config", default=None, help="base training config JSON")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("evaluate", parents=[common], help="metrics and ECDF for a checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out-metrics", required=True)
    s.add_argument("--out-ecdf", required=True)
    s.add_argument("--subset", choices=("all", "test"), default="all",
                   help="'test' rebuilds the held-out split from the checkpoint's training config")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("locate", parents=[common], help="classical grid estimates")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--method", choices=("argmax", "centroid"), default="argmax")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_locate)

    s = sub.add_parser("residuals", parents=[common], help="measurement residual histograms")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--bins", type=int, default=50)
    s.add_argument("--range-span", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    s.add_argument("--out", required=True, help="writes <stem>_range.csv and <stem>_angle.csv")
    s.set_defaults(func=cmd_residuals)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "bins", 1) < 1 or getattr(args, "trials", 1) < 1:
        parser.error("--bins and --trials must be >= 1")
    try:
        args.func(args)
    except NumericalError as exc:
        print(f"ralm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"ralm: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
