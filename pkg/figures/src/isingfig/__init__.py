"""isingfig: figures from isinglab experiment CSV outputs."""

__version__ = "0.1.0"

from .render import render, SchemaError
