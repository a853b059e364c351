"""Exact-arithmetic laboratory for Avez ratio sets of random walks on groups."""

__version__ = "0.1.0"
