"""File formats: binary array container, scenario config, datasets, checkpoints."""
from .container import FORMAT_VERSION, MAGIC, read_container, write_container
from .scenario import Scenario, load_scenario
from .datasets import MeasurementSet, TensorSet, read_dataset, write_dataset
from .checkpoint import read_checkpoint, write_checkpoint

__all__ = [
    "FORMAT_VERSION", "MAGIC", "MeasurementSet", "Scenario", "TensorSet", "load_scenario",
    "read_checkpoint", "read_container", "read_dataset", "write_checkpoint", "write_container",
    "write_dataset",
]
