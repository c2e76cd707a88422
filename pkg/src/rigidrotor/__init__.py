"""Rigid-rotator geometry, dynamics and Wigner-type distributions on T*SO(3)."""

__version__ = "0.1.0"
