"""Aspect-aware opinion mining and extractive review summarization."""

__version__ = "0.1.0"
