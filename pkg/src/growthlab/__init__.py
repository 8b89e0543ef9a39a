"""Exact growth measurements for finitely generated matrix groups over Q."""

__version__ = "0.1.0"
