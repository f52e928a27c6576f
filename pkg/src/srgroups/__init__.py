"""Exact computations with symplectic reflection groups of rank 4."""

__version__ = "0.1.0"
