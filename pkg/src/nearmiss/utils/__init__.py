"""Small helpers without pipeline semantics."""
