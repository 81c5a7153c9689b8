"""Metrics module tests."""
