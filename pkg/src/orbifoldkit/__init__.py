"""Exact computations with reduced 1-dimensional orbifolds and their atlas groupoids."""

__version__ = "0.1.0"
