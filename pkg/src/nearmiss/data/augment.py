"""Spatial augmentation of frame volumes.

All functions take and return ``(T, H, W, C)`` uint8 volumes and apply the
same geometry to every frame.
"""

from dataclasses import dataclass

import cv2
import numpy as np

from nearmiss.core.errors import NearMissError


class AugmentError(NearMissError):
    """Raised for invalid augmentation parameters."""


def scaled_size(height: int, width: int, short_side: int) -> tuple[int, int]:
    """``(height, width)`` after a short-side rescale (long side floored)."""
    if height <= width:
        return short_side, int(width * short_side / height)
    return int(height * short_side / width), short_side


def resize_short_side(frames: np.ndarray, short_side: int) -> np.ndarray:
    """Rescale every frame so its shorter side equals ``short_side``.

    The aspect ratio is kept; the longer side is floored.
    """
    h, w = frames.shape[1:3]
    new_h, new_w = scaled_size(h, w, short_side)
    if (new_h, new_w) == (h, w):
        return frames.copy()
    return np.stack(
        [
            cv2.resize(frame, (new_w, new_h), interpolation=cv2.INTER_LINEAR)
            for frame in frames
        ]
    )


def crop(frames: np.ndarray, top: int, left: int, size: int) -> np.ndarray:
    """Square crop of ``size`` at ``(top, left)``."""
    return frames[:, top : top + size, left : left + size]


def scale_jitter(
    frames: np.ndarray,
    short_side_range: tuple[int, int] = (256, 320),
    seed: int | np.random.Generator = 0,
    crop_size: int = 224,
) -> np.ndarray:
    """Random short-side rescale followed by a random square crop.

    The short side is drawn uniformly from the inclusive range, so
    ``(224, 224)`` with a 224 crop is a pure resize.

    Args:
        frames: Input volume
        short_side_range: Inclusive ``(lo, hi)`` short-side range
        seed: Seed or generator; equal seeds give bit-identical output
        crop_size: Output height and width

    Returns:
        Volume of shape ``(T, crop_size, crop_size, C)``

    Raises:
        AugmentError: If the range is empty or the crop exceeds ``lo``

    """
    lo, hi = short_side_range
    if not 0 < lo <= hi:
        msg = f"short side range must satisfy 0 < lo <= hi, got {lo}, {hi}"
        raise AugmentError(msg)
    if crop_size > lo:
        msg = f"crop size {crop_size} larger than short side minimum {lo}"
        raise AugmentError(msg)
    rng = np.random.default_rng(seed)
    short_side = int(rng.integers(lo, hi, endpoint=True))
    scaled = resize_short_side(frames, short_side)
    h, w = scaled.shape[1:3]
    top = int(rng.integers(0, h - crop_size, endpoint=True))
    left = int(rng.integers(0, w - crop_size, endpoint=True))
    return crop(scaled, top, left, crop_size)


def center_crop(
    frames: np.ndarray, short_side: int, crop_size: int
) -> np.ndarray:
    """Deterministic evaluation transform: rescale, then center crop.

    Raises:
        AugmentError: If the crop exceeds the short side

    """
    if crop_size > short_side:
        msg = f"crop size {crop_size} larger than short side {short_side}"
        raise AugmentError(msg)
    h, w = frames.shape[1:3]
    geometry = CropGeometry.of(h, w, short_side, crop_size)
    scaled = resize_short_side(frames, short_side)
    return crop(scaled, geometry.top, geometry.left, crop_size)


@dataclass(frozen=True)
class CropGeometry:
    """Where an evaluation crop sits in the source frame."""

    source_size: tuple[int, int]
    scaled_size: tuple[int, int]
    top: int
    left: int
    crop_size: int

    @classmethod
    def of(
        cls, height: int, width: int, short_side: int, crop_size: int
    ) -> "CropGeometry":
        """Geometry of :func:`center_crop` on a ``height x width`` frame."""
        new_h, new_w = scaled_size(height, width, short_side)
        return cls(
            source_size=(height, width),
            scaled_size=(new_h, new_w),
            top=round((new_h - crop_size) / 2),
            left=round((new_w - crop_size) / 2),
            crop_size=crop_size,
        )

    def to_source(self, x: float, y: float) -> tuple[float, float]:
        """Map crop pixel ``(x, y)`` to source pixel coordinates."""
        (h, w), (new_h, new_w) = self.source_size, self.scaled_size
        return (
            (x + self.left + 0.5) * w / new_w - 0.5,
            (y + self.top + 0.5) * h / new_h - 0.5,
        )
