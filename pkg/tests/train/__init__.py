"""Training module tests."""
