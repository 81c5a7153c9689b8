"""Explanation module tests."""
