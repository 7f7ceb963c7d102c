"""Vorticity matrices of thermal states of quantum XY spin lattices."""

__version__ = "0.1.0"
