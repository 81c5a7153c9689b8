"""Tests for the sprite renderer and the motion detector."""

import numpy as np
import pytest

from nearmiss.core.labels import Label
from nearmiss.synth.motion import (
    detector_auc,
    detector_score,
    motion_energy,
)
from nearmiss.synth.render import generate_clip
from nearmiss.synth.spec import (
    Background,
    EntrySide,
    Intruder,
    SynthClipSpec,
)

BACKGROUND = Background(texture_seed=42)


@pytest.fixture
def near_spec() -> SynthClipSpec:
    """Near-miss clip whose intruder appears at 6 s."""
    return SynthClipSpec(
        seed=1,
        label=Label.NEAR_MISS,
        background=BACKGROUND,
        intruder=Intruder(
            onset_s=6.0,
            speed_px_per_s=30.0,
            bbox_size=(16, 16),
            entry_side=EntrySide.TOP,
        ),
    )


@pytest.fixture
def safe_spec() -> SynthClipSpec:
    """Safe clip over the same background."""
    return SynthClipSpec(
        seed=1, label=Label.SAFE_DRIVING, background=BACKGROUND
    )


class TestGenerateClip:
    """Test rendering."""

    def test_bit_exact(self, near_spec: SynthClipSpec) -> None:
        """Test that a spec renders to the same bytes twice."""
        first, truth = generate_clip(near_spec, "a")
        second, _ = generate_clip(near_spec, "a")

        assert first.shape == (150, 112, 112, 3)
        assert first.dtype == np.uint8
        assert first.tobytes() == second.tobytes()
        assert truth.clip_id == "a"

    def test_boxes_follow_onset(self, near_spec: SynthClipSpec) -> None:
        """Test that the intruder is visible from its onset frame only."""
        _, truth = generate_clip(near_spec)

        frames = sorted(truth.intruder_bboxes)
        assert frames[0] == 60
        for x0, y0, x1, y1 in truth.intruder_bboxes.values():
            assert 0 <= x0 < x1 <= 112
            assert 0 <= y0 < y1 <= 112

    def test_background_unchanged_before_onset(
        self, near_spec: SynthClipSpec, safe_spec: SynthClipSpec
    ) -> None:
        """Test that only the sprite differs between the two clips."""
        near, _ = generate_clip(near_spec)
        safe, truth = generate_clip(safe_spec)

        np.testing.assert_array_equal(near[:60], safe[:60])
        assert truth.intruder_bboxes == {}

    def test_sprite_drawn_in_box(self, near_spec: SynthClipSpec) -> None:
        """Test that the box holds the sprite color."""
        frames, truth = generate_clip(near_spec)
        x0, y0, x1, y1 = truth.intruder_bboxes[60]

        patch = frames[60, y0:y1, x0:x1]

        assert (patch == (230, 40, 40)).all()


class TestMotion:
    """Test the frame-difference detector."""

    def test_static_frames_have_no_energy(self) -> None:
        """Test that identical frames give zero energy."""
        frames = np.full((5, 8, 8, 3), 100, dtype=np.uint8)

        energy = motion_energy(frames)

        assert energy.shape == (4,)
        assert not energy.any()

    def test_single_frame(self) -> None:
        """Test that one frame has no transitions."""
        assert motion_energy(np.zeros((1, 4, 4, 3), np.uint8)).size == 0

    def test_event_scores_higher(
        self, near_spec: SynthClipSpec, safe_spec: SynthClipSpec
    ) -> None:
        """Test that the intruder raises the near-miss window energy."""
        near, _ = generate_clip(near_spec)
        safe, _ = generate_clip(safe_spec)

        assert detector_score(near, 10.0) > detector_score(safe, 10.0)

    def test_auc_extremes(self) -> None:
        """Test perfect and inverted separation."""
        assert detector_auc([3.0, 4.0], [1.0, 2.0]) == 1.0
        assert detector_auc([1.0, 2.0], [3.0, 4.0]) == 0.0

    def test_auc_needs_both_classes(self) -> None:
        """Test that one-class input is rejected."""
        with pytest.raises(ValueError, match="at least one"):
            detector_auc([1.0], [])
