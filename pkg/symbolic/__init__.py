"""Symbolic expressions, jet variables and frame calculus for model systems."""
