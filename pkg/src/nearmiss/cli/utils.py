"""Shared utilities for CLI commands."""

import importlib.metadata
import platform
from argparse import Namespace
from pathlib import Path
from typing import Any

import cv2
import numpy as np
import torch

from nearmiss.core.config import RunConfig, load_config
from nearmiss.core.errors import MissingArtifactError
from nearmiss.core.logger import get_logger, setup_logging
from nearmiss.core.records import write_json
from nearmiss.data.clips import ClipRecord, read_manifest
from nearmiss.data.dataset import (
    ChannelStats,
    SegmentDataset,
    read_channel_stats,
)
from nearmiss.data.segmentation import LabeledSegment, read_segments
from nearmiss.data.splits import SplitName, assign_segments, read_splits
from nearmiss.utils.paths import RunLayout

logger = get_logger(__name__)


def get_version() -> str:
    """Get the installed package version.

    Returns:
        str: Version string, or "dev" when running from a source tree

    """
    try:
        return importlib.metadata.version("nearmiss-slowfast")
    except importlib.metadata.PackageNotFoundError:
        return "dev"


def library_versions() -> dict[str, str]:
    """Versions of the interpreter and the numeric stack."""
    return {
        "nearmiss": get_version(),
        "python": platform.python_version(),
        "torch": torch.__version__,
        "numpy": np.__version__,
        "opencv": cv2.__version__,
    }


def prepare_run(args: Namespace) -> tuple[RunConfig, RunLayout]:
    """Load the configuration named on the command line and open the run.

    Logging is redirected into the run directory and the effective
    configuration is echoed there before any work starts.
    """
    config_path = Path(args.config) if args.config else None
    cfg = load_config(config_path, overrides=args.set or [])
    layout = RunLayout(cfg.output_dir)
    setup_logging(
        verbose=args.verbose,
        log_dir=layout.logs,
        command=getattr(args, "command", None),
    )
    cfg.write_echo(layout.config_echo)
    logger.debug("Run directory: %s", layout.root)
    return cfg, layout


def write_run_info(
    layout: RunLayout,
    cfg: RunConfig,
    command: str,
    extra: dict[str, Any] | None = None,
) -> None:
    """Record command, seeds, versions and effective config in run.json."""
    write_json(
        layout.run_info,
        {
            "command": command,
            "seeds": {
                "data": cfg.data.seed,
                "synth": cfg.synth.master_seed,
                "train": cfg.train.seed,
                "init": cfg.train.init_seed,
            },
            "versions": library_versions(),
            "config": cfg.to_dict(),
            **(extra or {}),
        },
    )


def require(path: Path, hint: str) -> Path:
    """Return ``path`` if it exists.

    Raises:
        MissingArtifactError: Naming the path and the command producing it

    """
    if not path.exists():
        raise MissingArtifactError(path, hint)
    return path


def manifest_path(cfg: RunConfig, layout: RunLayout) -> Path:
    """Configured manifest, or the run's synthetic one."""
    if cfg.data.manifest:
        return Path(cfg.data.manifest).expanduser()
    return layout.synth_manifest


def load_clips(cfg: RunConfig, layout: RunLayout) -> dict[str, ClipRecord]:
    """Clips of the configured manifest by id."""
    path = require(manifest_path(cfg, layout), "run 'nearmiss synth' first")
    return {clip.clip_id: clip for clip in read_manifest(path)}


def select_device() -> torch.device:
    """First CUDA device when available, else the CPU."""
    return torch.device("cuda" if torch.cuda.is_available() else "cpu")


def load_prepared(
    cfg: RunConfig, layout: RunLayout
) -> tuple[
    dict[str, ClipRecord],
    dict[SplitName, list[LabeledSegment]],
    ChannelStats,
]:
    """Clips, per-split segments and channel stats written by prepare."""
    hint = "run 'nearmiss prepare' first"
    clips = load_clips(cfg, layout)
    segments = read_segments(require(layout.segments, hint))
    split = read_splits(require(layout.splits, hint))
    stats = read_channel_stats(require(layout.channel_stats, hint))
    return clips, assign_segments(segments, split), stats


def make_dataset(
    cfg: RunConfig,
    segments: list[LabeledSegment],
    clips: dict[str, ClipRecord],
    stats: ChannelStats,
    *,
    train: bool,
) -> SegmentDataset:
    """Dataset over ``segments`` with the configured transforms."""
    return SegmentDataset(
        segments,
        clips,
        cfg.model,
        stats,
        train=train,
        seed=cfg.train.seed,
        short_side_range=cfg.data.short_side_range,
        crop_size=cfg.data.crop_size,
    )
