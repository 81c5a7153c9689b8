"""Model module tests."""
