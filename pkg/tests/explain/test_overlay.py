"""Tests for heatmap overlays."""

from pathlib import Path

import cv2
import numpy as np
import pytest

from nearmiss.core.labels import Label
from nearmiss.explain.gradcam import ExplainError, HeatmapStack
from nearmiss.explain.overlay import colorize, render_overlay, write_overlays
from nearmiss.model.config import Pathway


@pytest.fixture
def frame() -> np.ndarray:
    """Gray 16x16 RGB frame."""
    return np.full((16, 16, 3), 128, dtype=np.uint8)


class TestRenderOverlay:
    """Test blending."""

    def test_zero_opacity_keeps_frame(self, frame: np.ndarray) -> None:
        """Test that an invisible heatmap leaves the frame unchanged."""
        out = render_overlay(frame, np.ones((16, 16)), opacity=0.0)

        np.testing.assert_array_equal(out, frame)

    def test_full_opacity_is_colormap(self, frame: np.ndarray) -> None:
        """Test that an opaque heatmap shows only the colormap."""
        heat = np.linspace(0, 1, 256).reshape(16, 16)

        out = render_overlay(frame, heat, opacity=1.0)

        np.testing.assert_array_equal(out, colorize(heat.astype(np.float32)))

    def test_heatmap_resized(self, frame: np.ndarray) -> None:
        """Test that the output keeps the frame size."""
        assert render_overlay(frame, np.ones((4, 4))).shape == (16, 16, 3)

    @pytest.mark.parametrize("opacity", [-0.1, 1.5])
    def test_bad_opacity(self, frame: np.ndarray, opacity: float) -> None:
        """Test that opacity is a fraction."""
        with pytest.raises(ExplainError, match="opacity"):
            render_overlay(frame, np.ones((16, 16)), opacity)

    def test_gray_frame_refused(self) -> None:
        """Test that frames must be RGB."""
        with pytest.raises(ExplainError, match="H, W, 3"):
            render_overlay(np.zeros((4, 4)), np.ones((4, 4)))


class TestWriteOverlays:
    """Test overlay files."""

    def test_selected_frames(self, tmp_path: Path, frame: np.ndarray) -> None:
        """Test that one PNG per selected frame is written."""
        frames = np.stack([frame] * 3)
        stack = HeatmapStack(
            pathway=Pathway.SLOW,
            maps=np.zeros((3, 16, 16), dtype=np.float32),
            source_layer="slow_res5",
            target_class=Label.NEAR_MISS,
        )

        paths = write_overlays(tmp_path, frames, stack, selected=[0, 2])

        assert [p.name for p in paths] == ["slow_000.png", "slow_002.png"]
        assert cv2.imread(str(paths[0])).shape == (16, 16, 3)
        with pytest.raises(ExplainError, match="outside"):
            write_overlays(tmp_path, frames, stack, selected=[3])
        with pytest.raises(ExplainError, match="frames for"):
            write_overlays(tmp_path, frames[:2], stack)
