"""Utilities module."""
__all__ = []
