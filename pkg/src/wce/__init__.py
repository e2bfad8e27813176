"""Exact W-constraint engine for simple singularities."""
from wce.kernels import COMPILED

__version__ = "0.1.0"

__all__ = ["COMPILED", "__version__"]
