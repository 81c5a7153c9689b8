"""End-to-end run of every sub-command on a tiny synthetic corpus."""

import logging
from dataclasses import replace
from pathlib import Path

import numpy as np
import orjson
import pytest

from nearmiss.explain.saliency import save_saliency
from nearmiss.main import main
from nearmiss.model.checkpoint import load_checkpoint, save_checkpoint

TINY_OVERRIDES = [
    "synth.n=6",
    "synth.resolution=32,32",
    "data.short_side_min=32",
    "data.short_side_max=36",
    "data.crop_size=32",
    "model.backbone_depth=18",
    "model.base_width=8",
    "model.dropout_rate=0.0",
    "train.warmup_epochs=1",
    "train.t_max=2",
    "train.max_epochs=2",
    "train.batch_size=2",
    "train.smoothing_window=3",
    "explain.frames=0,3",
]


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Run directory after synth, prepare, train and eval."""
    root = tmp_path_factory.mktemp("run")
    root_logger = logging.getLogger()
    saved = list(root_logger.handlers)
    try:
        for command in ("synth", "prepare", "train", "eval"):
            extra = ["--motion-check"] if command == "synth" else []
            assert main([command, *extra, *run_args(root)]) == 0, command
    finally:
        for handler in root_logger.handlers:
            if handler not in saved:
                handler.close()
        root_logger.handlers[:] = saved
    return root


def run_args(root: Path) -> list[str]:
    """``--set`` options for the tiny profile writing into ``root``."""
    options = [f"io.output_dir={root}", *TINY_OVERRIDES]
    return [arg for option in options for arg in ("--set", option)]


def read(path: Path) -> dict:
    """Parse a JSON artifact."""
    return orjson.loads(path.read_bytes())


@pytest.mark.e2e
@pytest.mark.slow
class TestPipeline:
    """Test the artifacts each command leaves in the run directory."""

    def test_synth_and_prepare(self, run_dir: Path) -> None:
        """Test the corpus, splits and statistics."""
        manifest = run_dir / "synth" / "manifest.jsonl"

        assert len(manifest.read_text().splitlines()) == 6
        splits = read(run_dir / "splits.json")
        sizes = [len(splits[name]) for name in ("train", "validation", "test")]
        assert sizes == [3, 1, 2]
        assert (run_dir / "segments.jsonl").exists()
        assert (run_dir / "channel_stats.json").exists()
        assert (run_dir / "config.ini").exists()
        assert (run_dir / "logs" / "nearmiss.log").exists()

    def test_train(self, run_dir: Path) -> None:
        """Test checkpoints, curves and the model summary."""
        assert (run_dir / "checkpoints" / "best.pt").exists()
        assert (run_dir / "checkpoints" / "last.pt").exists()
        rows = (run_dir / "validation.jsonl").read_text().splitlines()
        assert len(rows) == 2
        summary = read(run_dir / "model_summary.json")
        assert 0 < summary["totals"]["fast_share"] < 1

    def test_eval(self, run_dir: Path) -> None:
        """Test the metrics report of the test split."""
        report = read(run_dir / "eval" / "test" / "metrics.json")

        assert report["split"] == "test"
        assert set(report["metrics"]["display"]) == {
            "accuracy",
            "recall",
            "precision",
            "f1",
        }
        assert report["comparison"]["reference"] == "NTT (V)"
        predictions = run_dir / "eval" / "test" / "predictions.jsonl"
        assert len(predictions.read_text().splitlines()) == report["samples"]
        run_info = read(run_dir / "run.json")
        assert run_info["command"] == "eval"
        assert "torch" in run_info["versions"]

    def test_explain_and_plot(self, run_dir: Path) -> None:
        """Test heatmap summary and curve figures."""
        args = run_args(run_dir)

        assert main(["explain", *args]) == 0
        assert main(["plot", *args]) == 0

        summary = read(run_dir / "explain" / "summary.json")
        assert summary["pathway"] == "fast"
        assert summary["segments"] > 0
        assert (run_dir / "plots" / "top1_error.png").exists()
        assert (run_dir / "plots" / "loss.png").exists()

    def test_slow_only_eval(self, run_dir: Path) -> None:
        """Test that the ablation writes its own report."""
        args = ["eval", "--slow-only", "--split", "validation"]

        assert main([*args, *run_args(run_dir)]) == 0

        report = run_dir / "eval" / "validation_slow_only" / "metrics.json"
        assert read(report)["slow_only"] is True

    def test_explain_covers_both_labels(self, run_dir: Path) -> None:
        """Test that safe-driving segments get heatmaps and entropy."""
        assert main(["explain", *run_args(run_dir)]) == 0

        summary = read(run_dir / "explain" / "summary.json")
        counts = summary["segments_by_label"]
        assert counts["safe_driving"] >= 2
        assert sum(counts.values()) == summary["segments"]
        assert summary["median_entropy"]["safe_driving"] is not None
        segment_dirs = [
            path for path in (run_dir / "explain").iterdir() if path.is_dir()
        ]
        assert len(segment_dirs) == summary["segments"]

    def test_gaze_overlap(self, run_dir: Path, tmp_path: Path) -> None:
        """Test that every test segment is compared with its gaze map."""
        gaze = np.ones((9, 16))
        gaze[2:5, 3:7] = 5.0
        for clip_id in read(run_dir / "splits.json")["test"]:
            save_saliency(tmp_path / f"{clip_id}.txt", gaze)
        option = f"explain.saliency_dir={tmp_path}"
        args = [*run_args(run_dir), "--set", option]

        assert main(["explain", *args]) == 0

        rows = [
            orjson.loads(line)
            for line in (run_dir / "explain" / "overlap.jsonl")
            .read_bytes()
            .splitlines()
        ]
        assert {row["label"] for row in rows} >= {"safe_driving"}
        summary = read(run_dir / "explain" / "summary.json")
        assert "median_pearson_cc" in summary

    def test_explain_checkpoint_without_stats(
        self, run_dir: Path, tmp_path: Path
    ) -> None:
        """Test that explain falls back to the prepared channel stats."""
        checkpoint = load_checkpoint(run_dir / "checkpoints" / "best.pt")
        bare = tmp_path / "bare.pt"
        save_checkpoint(bare, replace(checkpoint, normalization={}))

        args = ["explain", "--checkpoint", str(bare), *run_args(run_dir)]

        assert main(args) == 0
