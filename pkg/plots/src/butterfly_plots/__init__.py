"""Render hofsim CSV datasets into publication-style PNG figures.

The package consumes only the documented CSV contracts (exact, heatmap,
peaks, deviations, trace, spectrum files); it never imports the simulator.
"""

__version__ = "0.1.0"

from .io import SchemaError
from .render import VARIANTS, render

__all__ = ["SchemaError", "VARIANTS", "render", "__version__"]
