"""Core plumbing shared by every pipeline stage."""
