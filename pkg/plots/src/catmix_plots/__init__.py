"""Figure rendering for catmix experiment outputs."""

from .render import KINDS, RenderError, main, render

__version__ = "0.1.0"
