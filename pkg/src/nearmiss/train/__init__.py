"""Training: warmup + cosine schedule, SGD loop, curves and plots."""
