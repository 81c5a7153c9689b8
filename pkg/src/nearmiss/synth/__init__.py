"""Synthetic dashcam-like clips with controllable near-miss events."""
