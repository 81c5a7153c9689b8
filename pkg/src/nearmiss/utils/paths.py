"""Path utilities for resolving package-relative files and run layouts."""

from pathlib import Path


def get_configs_dir() -> Path:
    """Get the directory containing packaged configuration files.

    Returns:
        Path to src/nearmiss/configs/

    """
    # This module is in src/nearmiss/utils/paths.py
    # Navigate: utils/ -> nearmiss/ -> configs/
    return Path(__file__).parent.parent / "configs"


def resolve_config_file(filename: str) -> Path:
    """Resolve a packaged config file (e.g. "default.ini")."""
    return get_configs_dir() / filename


class RunLayout:
    """Canonical locations of every artifact inside a run directory.

    All commands read and write through this layout so that a result can
    be traced back from the directory alone.
    """

    def __init__(self, output_dir: Path) -> None:
        """Bind the layout to ``output_dir``."""
        self.root = output_dir

    @property
    def logs(self) -> Path:
        """Directory holding the rotating log file."""
        return self.root / "logs"

    @property
    def config_echo(self) -> Path:
        """Effective configuration echo."""
        return self.root / "config.ini"

    @property
    def run_info(self) -> Path:
        """Seeds and versions of the last command."""
        return self.root / "run.json"

    @property
    def synth_dir(self) -> Path:
        """Root of the generated synthetic corpus."""
        return self.root / "synth"

    @property
    def synth_manifest(self) -> Path:
        """Manifest emitted by the synthetic generator."""
        return self.synth_dir / "manifest.jsonl"

    @property
    def truth_dir(self) -> Path:
        """Ground-truth sidecars of the synthetic corpus."""
        return self.synth_dir / "truth"

    @property
    def splits(self) -> Path:
        """Split file written by ``prepare``."""
        return self.root / "splits.json"

    @property
    def segments(self) -> Path:
        """Segment table written by ``prepare``."""
        return self.root / "segments.jsonl"

    @property
    def channel_stats(self) -> Path:
        """Training-split normalization statistics."""
        return self.root / "channel_stats.json"

    @property
    def checkpoints(self) -> Path:
        """Checkpoint directory."""
        return self.root / "checkpoints"

    @property
    def best_checkpoint(self) -> Path:
        """Checkpoint with the best validation accuracy."""
        return self.checkpoints / "best.pt"

    @property
    def last_checkpoint(self) -> Path:
        """Checkpoint after the final epoch."""
        return self.checkpoints / "last.pt"

    @property
    def curve(self) -> Path:
        """Per-iteration training curve."""
        return self.root / "curve.jsonl"

    @property
    def validation_curve(self) -> Path:
        """Per-epoch validation rows."""
        return self.root / "validation.jsonl"

    @property
    def model_summary(self) -> Path:
        """Per-layer shape and FLOP table."""
        return self.root / "model_summary.json"

    @property
    def eval_dir(self) -> Path:
        """Evaluation outputs."""
        return self.root / "eval"

    @property
    def explain_dir(self) -> Path:
        """Explanation outputs."""
        return self.root / "explain"

    @property
    def plots_dir(self) -> Path:
        """Rendered curve plots."""
        return self.root / "plots"
