"""Tests module."""
__all__ = []
