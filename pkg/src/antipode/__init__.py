"""Antipode-preserving cubic maps: exact circle combinatorics and numerics."""
__version__ = "0.1.0"
