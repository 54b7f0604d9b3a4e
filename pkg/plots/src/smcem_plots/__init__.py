"""Publication-style figures from smcem experiment CSVs."""

__version__ = "0.1.0"

from .render import PlotSpec, PlotError, build_figure, render

__all__ = ["PlotSpec", "PlotError", "build_figure", "render"]
