"""Pipeline-level guarantees: reproducibility, learnability, localization."""

import logging
from collections.abc import Sequence
from pathlib import Path

import orjson
import pytest
import torch

from nearmiss.main import main

TINY_OVERRIDES = [
    "synth.n=6",
    "synth.resolution=32,32",
    "data.short_side_min=32",
    "data.short_side_max=36",
    "data.crop_size=32",
    "data.workers=0",
    "model.backbone_depth=18",
    "model.base_width=8",
    "train.warmup_epochs=1",
    "train.t_max=2",
    "train.max_epochs=2",
    "train.batch_size=2",
    "train.smoothing_window=3",
]

# Written by train and eval; none of them embeds a path or a timestamp
REPRODUCIBLE_ARTIFACTS = [
    "splits.json",
    "segments.jsonl",
    "curve.jsonl",
    "validation.jsonl",
    "eval/test/metrics.json",
    "eval/test/predictions.jsonl",
]


def options(root: Path, overrides: Sequence[str]) -> list[str]:
    """``--set`` arguments writing into ``root``."""
    pairs = [f"io.output_dir={root}", *overrides]
    return [arg for pair in pairs for arg in ("--set", pair)]


def run_pipeline(
    root: Path, overrides: Sequence[str], config: str | None = None
) -> None:
    """Run synth, prepare, train and eval into ``root``."""
    extra = ["--config", config] if config else []
    for command in ("synth", "prepare", "train", "eval"):
        args = [command, *extra, *options(root, overrides)]
        assert main(args) == 0, command


def read(path: Path) -> dict:
    """Parse a JSON artifact."""
    return orjson.loads(path.read_bytes())


@pytest.mark.e2e
@pytest.mark.slow
class TestReproducibility:
    """Test that identical config and seeds give identical results."""

    def test_two_runs_match(self, tmp_path: Path) -> None:
        """Test curves and reports byte for byte across two run dirs."""
        first, second = tmp_path / "a", tmp_path / "b"

        run_pipeline(first, TINY_OVERRIDES)
        run_pipeline(second, TINY_OVERRIDES)

        for name in REPRODUCIBLE_ARTIFACTS:
            assert (first / name).read_bytes() == (
                second / name
            ).read_bytes(), name

    def test_other_seed_differs(self, tmp_path: Path) -> None:
        """Test that the training seed does reach the curve."""
        run_pipeline(tmp_path / "a", TINY_OVERRIDES)
        run_pipeline(tmp_path / "b", [*TINY_OVERRIDES, "train.seed=1"])

        assert (tmp_path / "a" / "curve.jsonl").read_bytes() != (
            tmp_path / "b" / "curve.jsonl"
        ).read_bytes()


@pytest.mark.e2e
@pytest.mark.slow
@pytest.mark.skipif(
    not torch.cuda.is_available(),
    reason="the desk profile trains 60 epochs; needs an accelerator",
)
class TestDeskProfile:
    """Test learnability and localization on the 300-clip desk corpus."""

    @pytest.fixture(scope="class")
    def desk_run(self, tmp_path_factory: pytest.TempPathFactory) -> Path:
        """Desk run with both evaluations and heatmaps."""
        root = tmp_path_factory.mktemp("desk")
        root_logger = logging.getLogger()
        saved = list(root_logger.handlers)
        try:
            run_pipeline(root, [], config="desk.ini")
            common = ["--config", "desk.ini", *options(root, [])]
            assert main(["eval", "--slow-only", *common]) == 0
            assert main(["explain", *common]) == 0
        finally:
            for handler in root_logger.handlers:
                if handler not in saved:
                    handler.close()
            root_logger.handlers[:] = saved
        return root

    def test_slowfast_learns(self, desk_run: Path) -> None:
        """Test at least 90% test accuracy."""
        report = read(desk_run / "eval" / "test" / "metrics.json")

        assert report["metrics"]["scores"]["accuracy"] >= 90.0

    def test_fast_pathway_carries_motion(self, desk_run: Path) -> None:
        """Test that zeroing the fast pathway costs at least 10 points."""
        full = read(desk_run / "eval" / "test" / "metrics.json")
        slow = read(desk_run / "eval" / "test_slow_only" / "metrics.json")

        gap = (
            full["metrics"]["scores"]["accuracy"]
            - slow["metrics"]["scores"]["accuracy"]
        )
        assert gap >= 10.0

    def test_heatmap_peaks_on_intruder(self, desk_run: Path) -> None:
        """Test that fast heatmaps peak inside the box in 70% of clips."""
        summary = read(desk_run / "explain" / "summary.json")

        assert summary["localization_clips"] > 0
        assert summary["localization_hit_rate"] >= 0.7
