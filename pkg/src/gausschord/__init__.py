"""Gaussian chord-function propagation for Lindblad dynamics with linear coupling."""

__version__ = "0.1.0"
