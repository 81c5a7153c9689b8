"""Class-activation heatmaps, gaze-saliency comparison and overlays."""
