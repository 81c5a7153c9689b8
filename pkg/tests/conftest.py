"""Test fixtures for pytest."""

import logging
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest
import torch

from nearmiss.data.clips import ClipRecord
from nearmiss.data.segmentation import LabeledSegment, segment_corpus
from nearmiss.model.config import PathwayConfig
from nearmiss.synth.corpus import SynthCorpus, generate_corpus

TINY_SIZE = 32


def pytest_configure(config: pytest.Config) -> None:
    """Route logging to a NullHandler for the whole session."""
    # Avoid "I/O operation on closed file" errors from stale handlers
    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.addHandler(logging.NullHandler())
    root_logger.setLevel(logging.DEBUG)


@pytest.fixture(autouse=True)
def restore_root_handlers() -> Generator[None, None, None]:
    """Undo handlers installed by setup_logging during a test."""
    root_logger = logging.getLogger()
    saved = list(root_logger.handlers)
    level = root_logger.level
    yield
    for handler in root_logger.handlers:
        if handler not in saved:
            handler.close()
    root_logger.handlers[:] = saved
    root_logger.setLevel(level)


@pytest.fixture
def tiny_config() -> PathwayConfig:
    """Smallest valid architecture: 18-layer backbone, base width 8."""
    return PathwayConfig(
        alpha=4,
        beta_inv=8,
        slow_frames=2,
        backbone_depth=18,
        base_width=8,
        dropout_rate=0.0,
    )


@pytest.fixture
def tiny_inputs(
    tiny_config: PathwayConfig,
) -> tuple[torch.Tensor, torch.Tensor]:
    """One batch of two random ``(slow, fast)`` inputs at 32 px."""
    generator = torch.Generator().manual_seed(0)
    slow = torch.randn(
        2,
        3,
        tiny_config.slow_frames,
        TINY_SIZE,
        TINY_SIZE,
        generator=generator,
    )
    fast = torch.randn(
        2,
        3,
        tiny_config.fast_frames,
        TINY_SIZE,
        TINY_SIZE,
        generator=generator,
    )
    return slow, fast


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory: pytest.TempPathFactory) -> SynthCorpus:
    """Six rendered 32x32 clips (three near-miss), shared by the session."""
    root = tmp_path_factory.mktemp("corpus")
    return generate_corpus(
        6, 0.5, 7, root, resolution=(TINY_SIZE, TINY_SIZE), workers=2
    )


@pytest.fixture
def tiny_clips(tiny_corpus: SynthCorpus) -> dict[str, ClipRecord]:
    """Clips of the tiny corpus by id."""
    return {clip.clip_id: clip for clip in tiny_corpus.clips}


@pytest.fixture
def tiny_segments(tiny_corpus: SynthCorpus) -> list[LabeledSegment]:
    """Both segments of every tiny clip."""
    return segment_corpus(tiny_corpus.clips)


@pytest.fixture
def dashcam_clip(tmp_path: Path) -> ClipRecord:
    """A 15 s, 30 fps clip record whose event is at 10 s."""
    return ClipRecord.create("c1", tmp_path / "c1.mp4")


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded NumPy generator."""
    return np.random.default_rng(1234)
