"""Gradient descent laboratory for deep linear networks."""

__version__ = "0.1.0"
