"""Typed metagraph rewriting with encoders for several object type systems."""

__version__ = "0.1.0"
