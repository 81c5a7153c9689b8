"""Tests for the architecture config."""

import pytest

from nearmiss.model.config import (
    ModelConfigError,
    Pathway,
    PathwayConfig,
)


class TestPathwayConfig:
    """Test widths and validation."""

    def test_defaults(self) -> None:
        """Test the default SlowFast-101 4x8 geometry."""
        cfg = PathwayConfig()

        assert cfg.fast_frames == 8
        assert cfg.bottleneck
        assert cfg.stem_width(Pathway.SLOW) == 64
        assert cfg.stem_width(Pathway.FAST) == 8
        slow = cfg.stages(Pathway.SLOW)
        fast = cfg.stages(Pathway.FAST)
        assert [s.blocks for s in slow] == [3, 4, 23, 3]
        assert [s.dim_out for s in slow] == [256, 512, 1024, 2048]
        assert [s.dim_out for s in fast] == [32, 64, 128, 256]
        assert cfg.fusion_width(8) == 16

    def test_basic_blocks_for_depth_18(
        self, tiny_config: PathwayConfig
    ) -> None:
        """Test that the 18-layer backbone uses basic blocks."""
        assert not tiny_config.bottleneck
        assert [s.dim_out for s in tiny_config.stages(Pathway.SLOW)] == [
            8,
            16,
            32,
            64,
        ]

    def test_nonlocal_placement(self) -> None:
        """Test which stages carry a non-local block."""
        cfg = PathwayConfig()

        assert cfg.has_nonlocal(Pathway.SLOW, "res4")
        assert not cfg.has_nonlocal(Pathway.FAST, "res4")
        assert not cfg.has_nonlocal(Pathway.SLOW, "res3")

    @pytest.mark.parametrize(
        ("kwargs", "message"),
        [
            ({"alpha": 0}, "alpha must be >= 1"),
            ({"backbone_depth": 34}, "backbone_depth must be one of"),
            ({"num_classes": 1}, "num_classes"),
            ({"dropout_rate": 1.0}, "dropout_rate"),
            ({"fusion_kernel": 4}, "fusion_kernel"),
            ({"nonlocal_stages": frozenset({"slow.res9"})}, "slow.res9"),
            ({"base_width": 60}, "not divisible by beta_inv"),
        ],
    )
    def test_invalid(self, kwargs: dict[str, object], message: str) -> None:
        """Test that every invariant is enforced."""
        with pytest.raises(ModelConfigError, match=message):
            PathwayConfig(**kwargs)  # type: ignore[arg-type]

    def test_dict_round_trip(self) -> None:
        """Test serialization for checkpoints."""
        cfg = PathwayConfig(alpha=8, slow_frames=4)

        data = cfg.to_dict()

        assert data["nonlocal_stages"] == ["slow.res4"]
        assert PathwayConfig.from_dict(data) == cfg

    def test_from_dict_unknown_key(self) -> None:
        """Test that unknown keys are rejected."""
        with pytest.raises(ModelConfigError, match="invalid model config"):
            PathwayConfig.from_dict({"depth": 50})
