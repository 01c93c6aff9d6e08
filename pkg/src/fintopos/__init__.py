"""Finite topological spaces, their sheaves and simplicial tools."""

__version__ = "0.1.0"
