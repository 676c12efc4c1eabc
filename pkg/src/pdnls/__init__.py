"""Spectral ground states of pseudodifferential NLS equations near the unit sphere."""

__version__ = "0.1.0"
