"""Scenario configuration: a JSON document holding every simulation knob.

Example (all keys optional except where noted; shown values are defaults)::

    {
      "seed": 0,
      "cabin": {"x_min": 0, "x_max": 30, "y_min": 0, "y_max": 3.5},
      "anchors": [{"id": 0, "x": 3.0, "y": 0.2}, ...],
      "grid": {"rows": 62, "cols": 62},
      "error_model": {"sigma_r_los": 0.3, "sigma_theta_los": 0.05235987755982988,
                      "nlos_mu": 0.8, "nlos_sigma": 1.07},
      "conditions": {"p_los": 0.7, "p_nlos": 0.2, "p_outlier": 0.05, "p_failure": 0.05},
      "anchor_conditions": {"3": {"p_los": 1.0, "p_nlos": 0, "p_outlier": 0, "p_failure": 0}},
      "observation": {"sigma_r": 0.3, "sigma_theta": 0.05235987755982988},
      "positions": {"source": "uniform", "count": 1000},
      "noise_free": false
    }

``positions.source`` is ``uniform`` (uses ``count``), ``boarding`` (uses
``n_passengers`` and ``step_length``) or ``csv`` (uses ``path``, resolved
relative to the scenario file).  The default anchor layout is eight
anchors at x in {3, 11, 19, 27} and y in {0.2, 3.3}.
"""
import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from ..channel import ConditionModel, ErrorModelParams
from ..errors import DataError
from ..geometry import DEFAULT_ANCHORS, Anchor, CabinSpec, GridSpec, Point2D, validate_anchors
from ..likelihood import ObservationSigmas
from .container import canonical_json

POSITION_SOURCES = ("uniform", "boarding", "csv")
_TOP_KEYS = {"seed", "cabin", "anchors", "grid", "error_model", "conditions", "anchor_conditions",
             "observation", "positions", "noise_free"}
_POSITION_KEYS = {"source", "count", "n_passengers", "step_length", "path"}


@dataclass(frozen=True)
class PositionSource:
    source: str = "uniform"
    count: int = 1000
    n_passengers: int = 148
    step_length: float = 0.5
    path: Optional[str] = None


@dataclass(frozen=True)
class Scenario:
    seed: int = 0
    cabin: CabinSpec = field(default_factory=CabinSpec)
    anchors: tuple = DEFAULT_ANCHORS
    grid_rows: int = 62
    grid_cols: int = 62
    error_model: ErrorModelParams = field(default_factory=ErrorModelParams)
    conditions: ConditionModel = field(default_factory=ConditionModel)
    anchor_conditions: dict = field(default_factory=dict)
    observation: ObservationSigmas = field(default_factory=ObservationSigmas)
    positions: PositionSource = field(default_factory=PositionSource)
    noise_free: bool = False

    def __post_init__(self):
        validate_anchors(self.anchors, self.cabin)
        self.grid   # validates dimensions
        known = {a.id for a in self.anchors}
        for aid in self.anchor_conditions:
            if aid not in known:
                raise DataError(f"anchor_conditions refers to unknown anchor id {aid}")
        p = self.positions
        if p.source not in POSITION_SOURCES:
            raise DataError(f"positions.source must be one of {POSITION_SOURCES}, got {p.source!r}")
        if p.source == "uniform" and p.count < 1:
            raise DataError("positions.count must be >= 1")
        if p.source == "boarding" and (p.n_passengers < 1 or p.step_length <= 0):
            raise DataError("boarding needs n_passengers >= 1 and step_length > 0")
        if p.source == "csv" and not p.path:
            raise DataError("positions.path is required for source 'csv'")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.cabin, self.grid_rows, self.grid_cols)

    @property
    def sorted_anchors(self) -> tuple:
        return tuple(sorted(self.anchors, key=lambda a: a.id))

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        def plain(obj):
            return {f.name: getattr(obj, f.name) for f in fields(obj)}
        return {
            "seed": self.seed,
            "cabin": plain(self.cabin),
            "anchors": [{"id": a.id, "x": float(a.position.x), "y": float(a.position.y)}
                        for a in self.sorted_anchors],
            "grid": {"rows": self.grid_rows, "cols": self.grid_cols},
            "error_model": plain(self.error_model),
            "conditions": plain(self.conditions),
            "anchor_conditions": {str(k): plain(v) for k, v in sorted(self.anchor_conditions.items())},
            "observation": plain(self.observation),
            "positions": plain(self.positions),
            "noise_free": self.noise_free,
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict())).hexdigest()

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "Scenario":
        if not isinstance(d, dict):
            raise DataError("scenario must be a JSON object")
        unknown = set(d) - _TOP_KEYS
        if unknown:
            raise DataError(f"unknown scenario keys: {sorted(unknown)}")
        try:
            kw = {}
            if "seed" in d:
                kw["seed"] = _int(d["seed"], "seed")
            if "cabin" in d:
                kw["cabin"] = CabinSpec(**_floats(d["cabin"], CabinSpec, "cabin"))
            if "anchors" in d:
                kw["anchors"] = tuple(_anchor(a) for a in d["anchors"])
            if "grid" in d:
                g = d["grid"]
                _keys(g, {"rows", "cols"}, "grid")
                kw["grid_rows"] = _int(g.get("rows", 62), "grid.rows")
                kw["grid_cols"] = _int(g.get("cols", 62), "grid.cols")
            if "error_model" in d:
                kw["error_model"] = ErrorModelParams(**_floats(d["error_model"], ErrorModelParams, "error_model"))
            if "conditions" in d:
                kw["conditions"] = ConditionModel(**_floats(d["conditions"], ConditionModel, "conditions"))
            if "anchor_conditions" in d:
                kw["anchor_conditions"] = {
                    _int(k, "anchor_conditions key", key=True):
                        ConditionModel(**_floats(v, ConditionModel, f"anchor_conditions.{k}"))
                    for k, v in d["anchor_conditions"].items()}
            if "observation" in d:
                kw["observation"] = ObservationSigmas(**_floats(d["observation"], ObservationSigmas, "observation"))
            if "positions" in d:
                kw["positions"] = _positions(d["positions"], base_dir)
            if "noise_free" in d:
                if not isinstance(d["noise_free"], bool):
                    raise DataError("noise_free must be true or false")
                kw["noise_free"] = d["noise_free"]
        except TypeError as exc:
            raise DataError(f"invalid scenario: {exc}") from None
        return cls(**kw)


def _keys(d, allowed, where):
    if not isinstance(d, dict):
        raise DataError(f"{where} must be an object")
    extra = set(d) - set(allowed)
    if extra:
        raise DataError(f"unknown keys in {where}: {sorted(extra)}")


def _int(v, where, key=False):
    # JSON object keys are always strings, so only keys may arrive as digits
    if isinstance(v, bool) or (isinstance(v, str) and not key):
        raise DataError(f"{where} must be an integer")
    try:
        iv = int(v)
    except (TypeError, ValueError):
        raise DataError(f"{where} must be an integer, got {v!r}") from None
    if iv != v and not isinstance(v, str):
        raise DataError(f"{where} must be an integer, got {v!r}")
    return iv


def _floats(d, cls, where):
    names = {f.name for f in fields(cls)}
    _keys(d, names, where)
    out = {}
    for k, v in d.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise DataError(f"{where}.{k} must be a number, got {v!r}")
        out[k] = float(v)
    return out


def _anchor(a):
    _keys(a, {"id", "x", "y"}, "anchor")
    if not {"id", "x", "y"} <= set(a):
        raise DataError(f"anchor entries need id, x and y, got {a!r}")
    return Anchor(_int(a["id"], "anchor.id"), Point2D(float(a["x"]), float(a["y"])))


def _positions(p, base_dir):
    _keys(p, _POSITION_KEYS, "positions")
    kw = dict(p)
    for k in ("count", "n_passengers"):
        if k in kw:
            kw[k] = _int(kw[k], f"positions.{k}")
    if "step_length" in kw:
        kw["step_length"] = float(kw["step_length"])
    if kw.get("path") is not None and base_dir is not None:
        path = Path(kw["path"])
        kw["path"] = str(path if path.is_absolute() else Path(base_dir) / path)
    return PositionSource(**kw)


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"scenario file not found: {path}")
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    return Scenario.from_dict(d, base_dir=path.parent)
