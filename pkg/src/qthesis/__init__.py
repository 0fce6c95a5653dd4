"""Numerical laboratory for weak qubit measurement and superconducting-circuit models."""

__version__ = "0.1.0"
