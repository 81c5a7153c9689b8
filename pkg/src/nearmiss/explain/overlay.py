"""Heatmap overlays on RGB frames (OpenCV JET colormap)."""

from pathlib import Path

import cv2
import numpy as np

from nearmiss.explain.gradcam import ExplainError, HeatmapStack

COLORMAP = cv2.COLORMAP_JET


def colorize(heatmap: np.ndarray) -> np.ndarray:
    """``[0, 1]`` map to an RGB uint8 image through :data:`COLORMAP`."""
    levels = np.rint(np.clip(heatmap, 0.0, 1.0) * 255).astype(np.uint8)
    return cv2.cvtColor(cv2.applyColorMap(levels, COLORMAP), cv2.COLOR_BGR2RGB)


def render_overlay(
    frame: np.ndarray, heatmap: np.ndarray, opacity: float = 0.5
) -> np.ndarray:
    """Alpha-blend the colorized heatmap onto an RGB frame.

    The heatmap is resized bilinearly to the frame when sizes differ; the
    output has the frame's dimensions.

    Raises:
        ExplainError: If ``opacity`` is outside ``[0, 1]`` or the shapes
            cannot be matched

    """
    if not 0.0 <= opacity <= 1.0:
        msg = f"opacity must be in [0, 1], got {opacity}"
        raise ExplainError(msg)
    if frame.ndim != 3 or frame.shape[2] != 3:  # noqa: PLR2004
        msg = f"frame must be (H, W, 3), got {frame.shape}"
        raise ExplainError(msg)
    h, w = frame.shape[:2]
    heat = np.asarray(heatmap, dtype=np.float32)
    if heat.shape != (h, w):
        heat = cv2.resize(heat, (w, h), interpolation=cv2.INTER_LINEAR)
    if heat.shape != (h, w):
        msg = f"heatmap {heat.shape} does not match frame {(h, w)}"
        raise ExplainError(msg)
    blended = (1.0 - opacity) * frame.astype(np.float64)
    blended += opacity * colorize(heat).astype(np.float64)
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def write_overlays(
    out_dir: Path,
    frames: np.ndarray,
    stack: HeatmapStack,
    *,
    opacity: float = 0.5,
    selected: list[int] | None = None,
) -> list[Path]:
    """Write one overlay PNG per selected frame of ``stack``.

    Raises:
        ExplainError: On a frame/map count mismatch or a bad selection

    """
    if len(frames) != len(stack):
        msg = f"{len(frames)} frames for {len(stack)} heatmaps"
        raise ExplainError(msg)
    chosen = list(range(len(stack))) if selected is None else selected
    bad = [i for i in chosen if not 0 <= i < len(stack)]
    if bad:
        msg = f"frame selection {bad} outside 0..{len(stack) - 1}"
        raise ExplainError(msg)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in chosen:
        image = render_overlay(frames[i], stack.maps[i], opacity)
        path = out_dir / f"{stack.pathway.value}_{i:03d}.png"
        cv2.imwrite(str(path), cv2.cvtColor(image, cv2.COLOR_RGB2BGR))
        paths.append(path)
    return paths
