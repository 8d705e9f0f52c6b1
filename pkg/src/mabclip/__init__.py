"""Bandit-tuned multi-threshold clipping for OFDM links under intermittent
directional interference."""

__version__ = "0.1.0"
