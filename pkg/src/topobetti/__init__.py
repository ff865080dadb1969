"""Exact topological analysis of small ReLU network decision regions."""

__version__ = "0.1.0"
