"""Numerical laboratory for the debt-inflation channel of inflation."""

__version__ = "0.1.0"
