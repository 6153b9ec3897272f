"""sleepmis-plots: aggregate figures from sleepmis experiment CSVs."""

__version__ = "0.1.0"

from .render import KINDS, FigureSpec, RenderError, aggregate, aggregate_path, load_rows, render
