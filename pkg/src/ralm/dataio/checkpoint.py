"""Model checkpoints in the array container (``kind = "checkpoint"``).

Arrays are named ``param.<name>`` and ``buffer.<name>``.  The header meta
embeds the network config, the training config, the step counter and the
training history up to the saved epoch.
"""
import numpy as np

from ..errors import DataError, FormatError
from ..nn.model import ModelState, ResNetConfig, init_model
from ..optim import TrainConfig, TrainReport
from .container import read_container, write_container


class ShapeError(DataError):
    """Checkpoint parameters do not fit the requested network."""


def write_checkpoint(state: ModelState, model_cfg: ResNetConfig, path, train_cfg: TrainConfig = None,
                     report: TrainReport = None) -> None:
    arrays = {f"param.{k}": v for k, v in state.params.items()}
    arrays.update({f"buffer.{k}": v for k, v in state.buffers.items()})
    meta = {"model": model_cfg.to_dict(), "step": state.step,
            "train": train_cfg.to_dict() if train_cfg else None,
            "report": None if report is None else {
                "train_loss": list(report.train_loss), "val_loss": list(report.val_loss),
                "best_epoch": report.best_epoch}}
    write_container(path, arrays, meta, "checkpoint")


def read_checkpoint(path, expected: ResNetConfig = None, dtype=np.float64):
    """Return ``(state, model_cfg, train_cfg, report)``.

    With ``expected`` given, the checkpoint must describe a network of
    exactly that shape; otherwise :class:`ShapeError` is raised.
    """
    arrays, meta = read_container(path, "checkpoint")
    try:
        model_cfg = ResNetConfig.from_dict(meta["model"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad model config in checkpoint header ({exc})") from None
    if expected is not None:
        mine = {k: v for k, v in model_cfg.to_dict().items() if k != "dropout_rate"}
        theirs = {k: v for k, v in expected.to_dict().items() if k != "dropout_rate"}
        if mine != theirs:
            diff = {k: (mine[k], theirs[k]) for k in mine if mine[k] != theirs[k]}
            raise ShapeError(f"{path}: checkpoint network does not match requested one: {diff}")
    template = init_model(model_cfg, 0, dtype)
    state = ModelState(step=int(meta.get("step", 0)))
    for group, target in (("param", state.params), ("buffer", state.buffers)):
        ref = template.params if group == "param" else template.buffers
        for name, arr in ref.items():
            key = f"{group}.{name}"
            if key not in arrays:
                raise ShapeError(f"{path}: missing {key}")
            if arrays[key].shape != arr.shape:
                raise ShapeError(f"{path}: {key} has shape {arrays[key].shape}, network expects {arr.shape}")
            target[name] = arrays[key].astype(dtype)
    extra = set(arrays) - {f"param.{k}" for k in state.params} - {f"buffer.{k}" for k in state.buffers}
    if extra:
        raise ShapeError(f"{path}: unexpected arrays {sorted(extra)}")
    train_cfg = TrainConfig.from_dict(meta["train"]) if meta.get("train") else None
    report = None
    if meta.get("report"):
        r = meta["report"]
        report = TrainReport(list(r["train_loss"]), list(r["val_loss"]), int(r["best_epoch"]), str(path))
    return state, model_cfg, train_cfg, report
