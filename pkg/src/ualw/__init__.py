"""Finite-presentation workbench for algebraic logics and logic families."""

__version__ = "0.1.0"
