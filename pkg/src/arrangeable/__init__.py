"""Constructive machinery for embedding arrangeable low-bandwidth graphs."""

__version__ = "0.1.0"
