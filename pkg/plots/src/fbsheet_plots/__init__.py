"""Offline figure generation from fbsheet harness CSV outputs."""

__version__ = "0.1.0"

from .render import FIGURE_KINDS, PlotJob, SchemaError, normal_qq_band, render
