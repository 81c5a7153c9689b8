"""Confusion-matrix scores and baseline comparison reports."""
