"""Module containing the version of emowave."""

__version__ = "1.0.0"
