"""Exact computations on the Berkovich projective line over Q_p."""

__version__ = "0.1.0"
