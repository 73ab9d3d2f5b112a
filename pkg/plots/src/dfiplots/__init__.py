"""Publication-style time-series figures from simulator CSV output."""

from .render import MissingColumn, PlotSpec, read_columns, render_timeseries

__version__ = "0.1.0"
