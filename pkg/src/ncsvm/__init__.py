"""Nonconformity model selection for SVMs."""

__version__ = "0.1.0"
