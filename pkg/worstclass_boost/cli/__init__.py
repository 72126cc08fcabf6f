"""Command-line interface for worstclass_boost."""

from .app import cli, main

__all__ = ["cli", "main"]
