"""Spectral efficiency of random time-hopping and direct-sequence CDMA."""

__version__ = "0.1.0"
