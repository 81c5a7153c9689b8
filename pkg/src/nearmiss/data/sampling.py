"""Frame sampling for the two pathways.

Fast frames are spread uniformly over a segment's window, each taken at the
center of its stride; slow frames are every ``alpha``-th fast frame, so the
slow index set is always a subset of the fast one.
"""

import math
from dataclasses import dataclass

import numpy as np

from nearmiss.core.errors import NearMissError
from nearmiss.core.logger import get_logger
from nearmiss.data.clips import ClipRecord
from nearmiss.data.decoder import FrameDecoder, decoder_for
from nearmiss.data.segmentation import LabeledSegment
from nearmiss.model.config import PathwayConfig

logger = get_logger(__name__)


class SamplingError(NearMissError):
    """Raised when a segment cannot supply the requested frames."""


@dataclass(frozen=True)
class FramePair:
    """Frame volumes for the slow and fast pathways, ``(T, H, W, C)``."""

    slow_frames: np.ndarray
    fast_frames: np.ndarray
    slow_indices: tuple[int, ...]
    fast_indices: tuple[int, ...]
    alpha: int

    def __post_init__(self) -> None:
        """Check the frame-count law and shared geometry."""
        t_slow = self.slow_frames.shape[0]
        t_fast = self.fast_frames.shape[0]
        if t_fast != self.alpha * t_slow:
            msg = (
                f"fast frames {t_fast} != alpha {self.alpha} x "
                f"slow frames {t_slow}"
            )
            raise SamplingError(msg)
        if self.slow_frames.shape[1:] != self.fast_frames.shape[1:]:
            msg = (
                f"pathway geometry differs: slow {self.slow_frames.shape} "
                f"vs fast {self.fast_frames.shape}"
            )
            raise SamplingError(msg)
        if not set(self.slow_indices) <= set(self.fast_indices):
            msg = "slow frame indices must be a subset of the fast ones"
            raise SamplingError(msg)


def sample_indices(
    segment: LabeledSegment,
    fps: float,
    n_fast: int,
    rng: np.random.Generator | None = None,
) -> list[int]:
    """Source frame indices of the fast pathway for one segment.

    Without ``rng`` the i-th index is the center of the i-th of ``n_fast``
    equal strides: ``floor((i + 0.5) * span / n_fast)`` from the window
    start. With ``rng`` every stride is shifted by one shared random
    offset drawn from ``[0, stride)`` (training-time temporal jitter).

    Args:
        segment: Segment to sample
        fps: Frame rate of the source clip
        n_fast: Number of fast frames
        rng: Generator for the training offset; ``None`` for evaluation

    Raises:
        SamplingError: If the segment holds fewer than ``n_fast`` frames

    """
    available = len(segment.frame_indices)
    if available < n_fast:
        msg = (
            f"segment {segment.segment_id} holds {available} frames; "
            f"at least {n_fast} required"
        )
        raise SamplingError(msg)
    start = segment.frame_indices[0]
    span = min(segment.window.span_frames(fps), available)
    if rng is None:
        return [
            start + (2 * i + 1) * span // (2 * n_fast) for i in range(n_fast)
        ]
    stride = span / n_fast
    offset = float(rng.uniform(0.0, stride))
    return [
        start + min(math.floor(i * stride + offset), span - 1)
        for i in range(n_fast)
    ]


def sample_frames(
    segment: LabeledSegment,
    clip: ClipRecord,
    cfg: PathwayConfig,
    rng: np.random.Generator | None = None,
    decoder: FrameDecoder | None = None,
) -> FramePair:
    """Decode the fast frames of a segment and derive the slow ones.

    Args:
        segment: Segment of ``clip`` to sample
        clip: Source clip
        cfg: Architecture config providing ``alpha`` and frame counts
        rng: Training-time temporal jitter; ``None`` is deterministic
        decoder: Frame source; picked from the clip path when omitted

    Returns:
        Native-resolution frames for both pathways

    Raises:
        SamplingError: If the segment is too short or from another clip

    """
    if segment.clip_id != clip.clip_id:
        msg = (
            f"segment {segment.segment_id} does not belong to "
            f"clip {clip.clip_id}"
        )
        raise SamplingError(msg)
    fast_indices = sample_indices(segment, clip.fps, cfg.fast_frames, rng)
    slow_indices = fast_indices[:: cfg.alpha]
    frames = (decoder or decoder_for(clip)).read(clip, fast_indices)
    logger.debug(
        "Sampled %s: fast %s slow %s",
        segment.segment_id,
        fast_indices,
        slow_indices,
    )
    return FramePair(
        slow_frames=frames[:: cfg.alpha],
        fast_frames=frames,
        slow_indices=tuple(slow_indices),
        fast_indices=tuple(fast_indices),
        alpha=cfg.alpha,
    )
