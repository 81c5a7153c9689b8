"""Near-miss dashcam video classification with a SlowFast network."""
