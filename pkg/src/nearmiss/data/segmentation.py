"""Temporal segmentation of clips into labeled windows.

A 15 s clip is split around its near-miss moment: ``[0 s, 5 s)`` is safe
driving, ``[5 s, 10 s]`` is the near-miss lead-up, and everything after
the event is excluded so post-event frames never leak the outcome.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Self

from nearmiss.core.errors import NearMissError
from nearmiss.core.labels import Label
from nearmiss.core.logger import get_logger
from nearmiss.core.records import read_jsonl, write_jsonl
from nearmiss.data.clips import ClipRecord

logger = get_logger(__name__)

# Absorbs float noise in ``seconds * fps`` before rounding to frames.
_FRAME_EPS = 1e-9


class SegmentationError(NearMissError):
    """Raised when a segmentation policy does not fit a clip."""


@dataclass(frozen=True)
class Window:
    """A time interval in seconds, half-open ``[lo, hi)`` unless closed."""

    lo_s: float
    hi_s: float
    closed: bool = False

    def __post_init__(self) -> None:
        """Reject empty or negative intervals."""
        if self.lo_s < 0 or self.hi_s <= self.lo_s:
            msg = f"invalid window {self}: need 0 <= lo < hi"
            raise SegmentationError(msg)

    def __str__(self) -> str:
        """Render in interval notation, e.g. ``[5, 10]``."""
        close = "]" if self.closed else ")"
        return f"[{self.lo_s:g}, {self.hi_s:g}{close}"

    def contains(self, t: float) -> bool:
        """Whether timestamp ``t`` lies inside the window."""
        if t < self.lo_s:
            return False
        return t <= self.hi_s if self.closed else t < self.hi_s

    def overlaps(self, other: "Window") -> bool:
        """Whether the two windows share at least one instant."""
        lo = max(self.lo_s, other.lo_s)
        hi = min(self.hi_s, other.hi_s)
        if lo < hi:
            return True
        if lo > hi:
            return False
        # Touching at a single instant: shared only if both include it.
        return self.contains(lo) and other.contains(lo)

    def frame_range(self, fps: float, n_frames: int) -> range:
        """Indices of source frames whose timestamp falls in the window."""
        first = math.ceil(self.lo_s * fps - _FRAME_EPS)
        if self.closed:
            last = math.floor(self.hi_s * fps + _FRAME_EPS)
        else:
            last = math.ceil(self.hi_s * fps - _FRAME_EPS) - 1
        last = min(last, n_frames - 1)
        return range(first, last + 1)

    def span_frames(self, fps: float) -> int:
        """Nominal frame count of the window (5 s at 30 fps -> 150)."""
        return round((self.hi_s - self.lo_s) * fps)

    def to_dict(self) -> dict[str, Any]:
        """Serialize for segment tables."""
        return {"lo_s": self.lo_s, "hi_s": self.hi_s, "closed": self.closed}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        """Deserialize from :meth:`to_dict` output."""
        return cls(
            float(data["lo_s"]), float(data["hi_s"]), bool(data["closed"])
        )


@dataclass(frozen=True)
class SegmentationPolicy:
    """Which parts of a clip are safe driving, near-miss, or excluded."""

    safe_window: Window = field(default_factory=lambda: Window(0.0, 5.0))
    nearmiss_window: Window = field(
        default_factory=lambda: Window(5.0, 10.0, closed=True)
    )

    def __post_init__(self) -> None:
        """Require disjoint windows."""
        if self.safe_window.overlaps(self.nearmiss_window):
            msg = (
                f"safe window {self.safe_window} overlaps near-miss window "
                f"{self.nearmiss_window}"
            )
            raise SegmentationError(msg)

    def windows(self) -> tuple[tuple[Label, Window], ...]:
        """The policy windows with the label each one stands for."""
        return (
            (Label.SAFE_DRIVING, self.safe_window),
            (Label.NEAR_MISS, self.nearmiss_window),
        )

    def classify(self, t: float) -> Label | None:
        """Label of timestamp ``t``; ``None`` for the excluded remainder."""
        for label, window in self.windows():
            if window.contains(t):
                return label
        return None

    def validate_for(self, clip: ClipRecord) -> None:
        """Check that both windows lie inside the clip.

        Raises:
            SegmentationError: Naming the first window that exceeds the clip

        """
        for label, window in self.windows():
            if window.hi_s > clip.duration_s:
                msg = (
                    f"{label.value} window {window} exceeds duration "
                    f"{clip.duration_s:g} s of clip {clip.clip_id}"
                )
                raise SegmentationError(msg)


DEFAULT_POLICY = SegmentationPolicy()


@dataclass(frozen=True)
class LabeledSegment:
    """A labeled time window of one clip and its source frame indices."""

    clip_id: str
    label: Label
    window: Window
    frame_indices: tuple[int, ...]

    @property
    def segment_id(self) -> str:
        """Identifier unique within a corpus."""
        return f"{self.clip_id}:{self.label.value}@{self.window.lo_s:g}"

    def to_dict(self) -> dict[str, Any]:
        """Serialize for the segment table."""
        return {
            "clip_id": self.clip_id,
            "label": self.label.value,
            "window": self.window.to_dict(),
            "first_frame": self.frame_indices[0]
            if self.frame_indices
            else None,
            "n_frames": len(self.frame_indices),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        """Deserialize from :meth:`to_dict` output."""
        first = data["first_frame"]
        count = int(data["n_frames"])
        indices = () if first is None else tuple(range(first, first + count))
        return cls(
            clip_id=str(data["clip_id"]),
            label=Label(data["label"]),
            window=Window.from_dict(data["window"]),
            frame_indices=indices,
        )


def segment_clip(
    clip: ClipRecord, policy: SegmentationPolicy = DEFAULT_POLICY
) -> list[LabeledSegment]:
    """Cut ``clip`` into one labeled segment per policy window.

    The near-miss window of a clip without a recorded event is labeled
    safe driving: nothing happens in it.

    Raises:
        SegmentationError: If a window exceeds the clip duration

    """
    policy.validate_for(clip)
    segments: list[LabeledSegment] = []
    for window_label, window in policy.windows():
        label = window_label if clip.has_event else Label.SAFE_DRIVING
        frames = window.frame_range(clip.fps, clip.n_frames)
        segments.append(
            LabeledSegment(
                clip_id=clip.clip_id,
                label=label,
                window=window,
                frame_indices=tuple(frames),
            )
        )
    logger.debug(
        "Segmented %s into %s",
        clip.clip_id,
        ", ".join(f"{s.label.value}{s.window}" for s in segments),
    )
    return segments


def segment_corpus(
    clips: list[ClipRecord], policy: SegmentationPolicy = DEFAULT_POLICY
) -> list[LabeledSegment]:
    """Segment every clip, in manifest order."""
    segments = [s for clip in clips for s in segment_clip(clip, policy)]
    logger.info(
        "Segmented %d clips into %d segments", len(clips), len(segments)
    )
    return segments


def write_segments(path: Path, segments: list[LabeledSegment]) -> None:
    """Write the segment table as JSONL."""
    write_jsonl(path, (s.to_dict() for s in segments))


def read_segments(path: Path) -> list[LabeledSegment]:
    """Read a segment table written by :func:`write_segments`."""
    return [LabeledSegment.from_dict(d) for d in read_jsonl(path)]
