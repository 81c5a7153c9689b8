"""Sprite renderer for synthetic clips.

Frames are flat-shaded sprites over a procedural noise texture. Everything
is integer or float64 arithmetic seeded from the spec, so the same spec
renders to the same bytes on every platform.
"""

import math

import cv2
import numpy as np

from nearmiss.core.logger import get_logger
from nearmiss.synth.spec import (
    Background,
    GroundTruth,
    Intruder,
    SpriteShape,
    SynthClipSpec,
    Trajectory,
)

logger = get_logger(__name__)

# Noise cell size of the background texture, in pixels.
_TEXTURE_CELL = 8


def background_texture(
    background: Background, height: int, width: int
) -> np.ndarray:
    """Smooth RGB noise canvas, ``width`` pixels wide (drift margin incl.)."""
    rng = np.random.default_rng(background.texture_seed)
    coarse = rng.uniform(
        60.0,
        200.0,
        size=(height // _TEXTURE_CELL + 2, width // _TEXTURE_CELL + 2, 3),
    )
    smooth = cv2.resize(
        coarse.astype(np.float32),
        (width, height),
        interpolation=cv2.INTER_CUBIC,
    ).astype(np.float64)
    grain = rng.normal(0.0, 6.0, size=(height, width, 3))
    # darker lower half reads as road surface
    shade = np.linspace(1.0, 0.7, height)[:, None, None]
    return np.clip((smooth + grain) * shade, 0.0, 255.0)


def drifted_view(
    canvas: np.ndarray, shift_px: float, width: int
) -> np.ndarray:
    """Window of ``canvas`` shifted by a sub-pixel horizontal offset."""
    whole = math.floor(shift_px)
    frac = shift_px - whole
    left = canvas[:, whole : whole + width]
    if frac == 0:
        return np.rint(left).astype(np.uint8)
    right = canvas[:, whole + 1 : whole + 1 + width]
    return np.rint((1.0 - frac) * left + frac * right).astype(np.uint8)


def draw_sprite(
    frame: np.ndarray,
    box: tuple[int, int, int, int],
    intruder: Intruder,
) -> None:
    """Draw the intruder filling ``box`` (end-exclusive) in place."""
    x0, y0, x1, y1 = box
    color = tuple(int(c) for c in intruder.color)
    if intruder.shape is SpriteShape.RECTANGLE:
        cv2.rectangle(frame, (x0, y0), (x1 - 1, y1 - 1), color, thickness=-1)
        return
    box_w, box_h = x1 - x0, y1 - y0
    cv2.ellipse(
        frame,
        (x0 + box_w // 2, y0 + box_h // 2),
        (max((box_w - 1) // 2, 1), max((box_h - 1) // 2, 1)),
        0,
        0,
        360,
        color,
        thickness=-1,
    )


def generate_clip(
    spec: SynthClipSpec, clip_id: str = ""
) -> tuple[np.ndarray, GroundTruth]:
    """Render ``spec`` to an RGB volume and its ground truth.

    Args:
        spec: Validated clip specification
        clip_id: Identifier recorded in the ground truth

    Returns:
        ``(n_frames, H, W, 3)`` uint8 frames and the per-frame intruder
        boxes

    """
    height, width = spec.resolution
    drift = spec.background.drift_px_per_s
    margin = math.ceil(drift * spec.duration_s) + 2
    canvas = background_texture(spec.background, height, width + margin)
    trajectory = (
        Trajectory.of(spec, spec.intruder) if spec.intruder else None
    )

    frames = np.empty((spec.n_frames, height, width, 3), dtype=np.uint8)
    boxes: dict[int, tuple[int, int, int, int]] = {}
    for index in range(spec.n_frames):
        t = index / spec.fps
        frame = drifted_view(canvas, drift * t, width)
        if trajectory is not None and spec.intruder is not None:
            center = trajectory.center_at(t)
            if center is not None:
                box = trajectory.box_at(center)
                frame = np.ascontiguousarray(frame)
                draw_sprite(frame, box, spec.intruder)
                boxes[index] = box
        frames[index] = frame

    logger.debug(
        "Rendered %s: %s, %d frames, intruder visible in %d",
        clip_id or spec.seed,
        spec.label.value,
        spec.n_frames,
        len(boxes),
    )
    return frames, GroundTruth(
        clip_id=clip_id, label=spec.label, intruder_bboxes=boxes
    )
