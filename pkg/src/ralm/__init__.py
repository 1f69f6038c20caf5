"""Range/angle likelihood grid maps and residual-CNN positioning."""

__version__ = "0.1.0"
