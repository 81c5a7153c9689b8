"""Command-line interface for the near-miss pipeline."""
