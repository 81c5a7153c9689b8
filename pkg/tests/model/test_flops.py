"""Tests for FLOP attribution."""

import pytest

from nearmiss.model.config import PathwayConfig
from nearmiss.model.flops import flop_table, model_summary, pathway_flops
from nearmiss.model.slowfast import build_slowfast

TINY_SIZE = 32


class TestFlops:
    """Test per-layer and per-pathway counts."""

    def test_fast_share_is_minority(self, tiny_config: PathwayConfig) -> None:
        """Test that the thin fast pathway costs less than the slow one."""
        model = build_slowfast(tiny_config)

        share = pathway_flops(model, TINY_SIZE)

        assert 0.0 < share.fast_share < 0.5
        assert share.total == pytest.approx(share.slow + share.fast)

    def test_table_covers_pathways(self, tiny_config: PathwayConfig) -> None:
        """Test that rows exist for both pathways and mixed layers."""
        model = build_slowfast(tiny_config)

        rows = flop_table(model, TINY_SIZE)

        pathways = {row.pathway for row in rows}
        assert pathways == {"slow", "fast", "mixed"}
        assert any(row.kind == "NonLocalBlock" for row in rows)
        assert all(row.macs >= 0 for row in rows)

    def test_mode_restored(self, tiny_config: PathwayConfig) -> None:
        """Test that tracing leaves a training model in train mode."""
        model = build_slowfast(tiny_config)

        flop_table(model, TINY_SIZE)

        assert model.training

    def test_summary_totals(self, tiny_config: PathwayConfig) -> None:
        """Test that summary totals agree with the layer table."""
        model = build_slowfast(tiny_config)

        summary = model_summary(model, TINY_SIZE)

        totals = summary["totals"]
        assert totals["macs"] == sum(r["macs"] for r in summary["layers"])
        assert totals["slow_macs"] + totals["fast_macs"] == pytest.approx(
            totals["macs"]
        )
        assert summary["config"] == tiny_config.to_dict()

    @pytest.mark.slow
    def test_full_size_fast_share(self) -> None:
        """Test the default 101-layer model at 224 px."""
        model = build_slowfast(PathwayConfig(), guard=False)

        share = pathway_flops(model, 224)

        assert 0.05 < share.fast_share < 0.45
