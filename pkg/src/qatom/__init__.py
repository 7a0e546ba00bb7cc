"""Simulate and verify distributed quantum systems whose actions take time."""

__version__ = "0.1.0"
