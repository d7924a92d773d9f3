"""Exact free-field computations for screening operators and triplet W-algebras."""

__version__ = "0.1.0"
