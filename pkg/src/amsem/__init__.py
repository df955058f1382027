"""Distributional semantic models for Ethiopic-script (Amharic) text."""

__version__ = "0.1.0"
