"""Executable constructions for Baire-one functions and compositors on the real line."""

__version__ = "0.1.0"
