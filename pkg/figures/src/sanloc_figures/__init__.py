"""Figure rendering for sweep results (consumes results.csv only)."""

__version__ = "0.1.0"

from .render import FIGURE_IDS, FigureSpec, SchemaError, load_results, render, series_stats
