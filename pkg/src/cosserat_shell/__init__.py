"""Geometrically nonlinear isotropic Cosserat shell model with terms up to order h^5."""

__version__ = "0.1.0"
