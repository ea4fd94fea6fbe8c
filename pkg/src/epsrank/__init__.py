"""Executable certificates for the p-rank epsilon-conjecture on p-cyclic towers."""

__version__ = "0.1.0"
