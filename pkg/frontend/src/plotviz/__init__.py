"""Figure renderer for divlab sweep CSV files."""

__version__ = "0.1.0"

from .render import PlotDataError, read_sweep, render

__all__ = ["PlotDataError", "read_sweep", "render", "__version__"]
