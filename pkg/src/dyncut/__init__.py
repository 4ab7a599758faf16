"""Fully dynamic minimum c-cut engine with brute-force oracles."""
__version__ = "0.1.0"
