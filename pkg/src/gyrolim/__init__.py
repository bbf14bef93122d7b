"""Desk-scale numerics for the magnetized 2D Coulomb system and its Euler limit."""

__version__ = "0.1.0"
