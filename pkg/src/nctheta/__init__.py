"""Theta functions on classical and noncommutative tori."""

__version__ = "0.1.0"
