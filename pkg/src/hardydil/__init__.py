"""Anisotropic Hardy spaces on homogeneous groups: dilations, atoms and maximal functions."""

__version__ = "0.1.0"
