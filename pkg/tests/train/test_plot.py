"""Tests for training-curve figures."""

from pathlib import Path

import pytest

from nearmiss.train.curve import CurveError, CurvePoint, TrainingCurve
from nearmiss.train.plot import plot_curves


class TestPlotCurves:
    """Test figure output."""

    def test_writes_both_figures(self, tmp_path: Path) -> None:
        """Test that error and loss PNGs are written."""
        curve = TrainingCurve(
            points=[
                CurvePoint(i, 0, 0.1, 1.0 / (i + 1), 0.5) for i in range(12)
            ]
        )

        paths = plot_curves(curve, tmp_path / "figures", window=3)

        assert [p.name for p in paths] == ["top1_error.png", "loss.png"]
        for path in paths:
            assert path.read_bytes().startswith(b"\x89PNG")

    def test_empty_curve(self, tmp_path: Path) -> None:
        """Test that there is nothing to plot without iterations."""
        with pytest.raises(CurveError, match="empty"):
            plot_curves(TrainingCurve(), tmp_path)
