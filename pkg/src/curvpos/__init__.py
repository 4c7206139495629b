"""Pointwise curvature calculus and positivity certification for Hermitian vector bundles."""

__version__ = "0.1.0"
