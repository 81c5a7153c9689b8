"""Clip ingestion, temporal segmentation, splits, sampling, augmentation."""
