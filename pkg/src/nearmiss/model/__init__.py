"""The dual-pathway SlowFast classifier."""
