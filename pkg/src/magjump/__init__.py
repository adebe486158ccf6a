"""Magnetic Schrödinger operators on weighted graphs and their Feynman-Kac-Ito representation."""
__version__ = "0.1.0"
