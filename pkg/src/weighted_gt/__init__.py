"""Gradient tracking with heterogeneous node weights."""

__version__ = "0.1.0"
