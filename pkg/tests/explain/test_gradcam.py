"""Tests for Grad-CAM heatmaps and localization checks."""

import numpy as np
import pytest
import torch

from nearmiss.core.labels import Label
from nearmiss.explain.gradcam import (
    ExplainError,
    HeatmapStack,
    grad_cam,
    localization_hit_rate,
    peak_hits_box,
    resolve_layer,
    spatial_entropy,
    stack_entropy,
    upsample_cam,
)
from nearmiss.model.config import Pathway, PathwayConfig
from nearmiss.model.slowfast import SlowFast, build_slowfast
from nearmiss.synth.spec import GroundTruth

Inputs = tuple[torch.Tensor, torch.Tensor]


@pytest.fixture
def eval_model(tiny_config: PathwayConfig) -> SlowFast:
    """Tiny model in eval mode."""
    return build_slowfast(tiny_config, init_seed=1).eval()


def single(inputs: Inputs) -> Inputs:
    """First sample of a batch, without the batch axis."""
    slow, fast = inputs
    return slow[0], fast[0]


def point_stack(t: int, y: int, x: int) -> HeatmapStack:
    """Stack of four 8x8 maps peaking at ``(t, y, x)``."""
    maps = np.zeros((4, 8, 8), dtype=np.float32)
    maps[t, y, x] = 1.0
    return HeatmapStack(
        pathway=Pathway.FAST,
        maps=maps,
        source_layer="fast_res5",
        target_class=Label.NEAR_MISS,
    )


class TestGradCam:
    """Test heatmap computation on a tiny network."""

    def test_fast_maps(
        self, eval_model: SlowFast, tiny_inputs: Inputs
    ) -> None:
        """Test one normalized map per fast frame."""
        stack = grad_cam(eval_model, *single(tiny_inputs))

        assert stack.maps.shape == (8, 32, 32)
        assert stack.maps.dtype == np.float32
        assert stack.maps.min() >= 0.0
        assert stack.maps.max() <= 1.0
        assert stack.source_layer == "fast_res5"
        assert stack.target_class is Label.NEAR_MISS

    def test_slow_maps(
        self, eval_model: SlowFast, tiny_inputs: Inputs
    ) -> None:
        """Test maps aligned with the slow frames."""
        stack = grad_cam(
            eval_model,
            *single(tiny_inputs),
            target_class=Label.SAFE_DRIVING,
            pathway=Pathway.SLOW,
        )

        assert stack.maps.shape == (2, 32, 32)
        assert stack.source_layer == "slow_res5"

    def test_leaves_no_gradients(
        self, eval_model: SlowFast, tiny_inputs: Inputs
    ) -> None:
        """Test that explaining does not leave gradients behind."""
        grad_cam(eval_model, *single(tiny_inputs))

        assert all(p.grad is None for p in eval_model.parameters())

    def test_training_model_refused(
        self, tiny_config: PathwayConfig, tiny_inputs: Inputs
    ) -> None:
        """Test that dropout and batch statistics must be frozen."""
        model = build_slowfast(tiny_config)

        with pytest.raises(ExplainError, match="eval mode"):
            grad_cam(model, *single(tiny_inputs))

    def test_one_sample_only(
        self, eval_model: SlowFast, tiny_inputs: Inputs
    ) -> None:
        """Test that batches are refused."""
        with pytest.raises(ExplainError, match="one sample"):
            grad_cam(eval_model, *tiny_inputs)

    def test_unknown_layer(self, eval_model: SlowFast) -> None:
        """Test that the error lists the top-level modules."""
        with pytest.raises(ExplainError, match="slow_res5"):
            resolve_layer(eval_model, "fast_res9")


class TestUpsampleCam:
    """Test resizing feature maps to input frames."""

    def test_nearest_in_time(self) -> None:
        """Test that each input frame takes its source time slice."""
        cam = torch.stack([torch.full((2, 2), float(i)) for i in range(2)])

        maps = upsample_cam(cam, (8, 4, 4))

        assert maps.shape == (8, 4, 4)
        assert [float(m.mean()) for m in maps] == [0.0] * 4 + [1.0] * 4


class TestEntropy:
    """Test spatial entropy."""

    def test_uniform_is_maximal(self) -> None:
        """Test that a flat map has entropy log N."""
        assert spatial_entropy(np.ones((4, 4))) == pytest.approx(np.log(16))

    def test_point_is_zero(self) -> None:
        """Test that a single hot cell has no entropy."""
        assert spatial_entropy(point_stack(0, 1, 1).maps[0]) == 0.0

    def test_all_zero_counts_as_uniform(self) -> None:
        """Test the degenerate map."""
        assert spatial_entropy(np.zeros((2, 2))) == pytest.approx(np.log(4))

    def test_stack_mean(self) -> None:
        """Test averaging over frames."""
        expected = 3 * np.log(64) / 4
        assert stack_entropy(point_stack(0, 1, 1)) == pytest.approx(expected)


class TestLocalization:
    """Test the peak-in-box check."""

    def test_peak_inside_box(self) -> None:
        """Test a hit and a miss on the same frame."""
        truth = GroundTruth("c", Label.NEAR_MISS, {12: (2, 2, 5, 5)})
        frames = [10, 11, 12, 13]

        assert peak_hits_box(point_stack(2, 3, 4), frames, truth)
        assert not peak_hits_box(point_stack(2, 6, 6), frames, truth)

    def test_no_box_in_peak_frame(self) -> None:
        """Test that a peak on a frame without intruder misses."""
        truth = GroundTruth("c", Label.NEAR_MISS, {12: (0, 0, 8, 8)})

        assert not peak_hits_box(point_stack(0, 3, 3), [10, 11, 12, 13], truth)

    def test_index_count_mismatch(self) -> None:
        """Test that every map needs a source frame."""
        truth = GroundTruth("c", Label.SAFE_DRIVING, {})

        with pytest.raises(ExplainError, match="frame indices"):
            peak_hits_box(point_stack(0, 0, 0), [1, 2], truth)

    def test_hit_rate(self) -> None:
        """Test the fraction of hits."""
        assert localization_hit_rate([True, False, True, True]) == 0.75
        with pytest.raises(ExplainError, match="at least one"):
            localization_hit_rate([])
