"""Spotlight-SAR polar-format imaging with knowledge-aided 2-D autofocus."""

__version__ = "0.1.0"
