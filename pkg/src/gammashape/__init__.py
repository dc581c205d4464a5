"""Gamma-shaped constellation design for joint sensing and communication."""

__version__ = "0.1.0"
