"""Ballistic-noise risk toolkit: mean-preserving spread checks, stationary measures and simulation."""

__version__ = "0.1.0"
