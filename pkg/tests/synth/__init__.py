"""Synthetic corpus module tests."""
