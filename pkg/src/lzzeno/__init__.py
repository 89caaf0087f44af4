"""Landau-Zener dynamics under continuous weak non-selective measurement."""

__version__ = "0.1.0"
