"""Exact ground-state and expansion properties of 1D hard-core bosons and free
fermions in a harmonic trap with a central attractive delta potential."""

__version__ = "0.1.0"
