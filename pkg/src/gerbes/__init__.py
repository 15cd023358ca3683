"""Finite, exact models of non-abelian gerbes over groupoids."""

__version__ = "0.1.0"
