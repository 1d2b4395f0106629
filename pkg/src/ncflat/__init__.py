"""Exact universal differential calculus and flat (hom-)connections."""

__version__ = "0.1.0"
