"""Specifications of synthetic clips and their ground truth."""

import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Self

import numpy as np

from nearmiss.core.errors import NearMissError
from nearmiss.core.labels import Label
from nearmiss.data.segmentation import DEFAULT_POLICY, Window

DEFAULT_SYNTH_FPS = 10.0
DEFAULT_RESOLUTION = (112, 112)
DEFAULT_DURATION_S = 15.0
# Onset jitter keeps the event off any single fixed frame index.
DEFAULT_ONSET_RANGE = (5.5, 9.0)
# Speed and sprite size are stated for a 112 px wide frame and scale with
# the frame width.
REFERENCE_WIDTH = 112
DEFAULT_SPEED_RANGE = (25.0, 45.0)
DEFAULT_BBOX_RANGE = (14, 22)
DEFAULT_DRIFT_PX_PER_S = 2.0
# Intruder pixels must outpace the background drift by this factor.
MIN_SPEED_RATIO = 5.0


class SynthSpecError(NearMissError):
    """Raised for a synthetic clip specification that cannot be rendered."""


class EntrySide(StrEnum):
    """Frame edge the intruder enters from."""

    LEFT = "left"
    RIGHT = "right"
    TOP = "top"
    BOTTOM = "bottom"

    @property
    def direction(self) -> tuple[float, float]:
        """Unit motion vector ``(dx, dy)`` pointing into the frame."""
        return {
            EntrySide.LEFT: (1.0, 0.0),
            EntrySide.RIGHT: (-1.0, 0.0),
            EntrySide.TOP: (0.0, 1.0),
            EntrySide.BOTTOM: (0.0, -1.0),
        }[self]


class SpriteShape(StrEnum):
    """Flat-shaded sprite primitive."""

    RECTANGLE = "rectangle"
    ELLIPSE = "ellipse"


@dataclass(frozen=True)
class Intruder:
    """A sprite dashing from a frame edge toward the frame center."""

    onset_s: float
    speed_px_per_s: float
    bbox_size: tuple[int, int]
    entry_side: EntrySide
    lateral_offset_px: float = 0.0
    shape: SpriteShape = SpriteShape.RECTANGLE
    color: tuple[int, int, int] = (230, 40, 40)


@dataclass(frozen=True)
class Background:
    """Procedural noise texture drifting horizontally."""

    texture_seed: int
    drift_px_per_s: float = DEFAULT_DRIFT_PX_PER_S


@dataclass(frozen=True)
class SynthClipSpec:
    """Everything needed to render one clip bit-exactly."""

    seed: int
    label: Label
    background: Background
    intruder: Intruder | None = None
    duration_s: float = DEFAULT_DURATION_S
    fps: float = DEFAULT_SYNTH_FPS
    resolution: tuple[int, int] = DEFAULT_RESOLUTION
    nearmiss_window: Window = field(
        default_factory=lambda: DEFAULT_POLICY.nearmiss_window
    )

    def __post_init__(self) -> None:
        """Validate label/intruder consistency and trajectory bounds."""
        problems = self.problems()
        if problems:
            raise SynthSpecError("; ".join(problems))

    @property
    def n_frames(self) -> int:
        """Frames in the clip."""
        return round(self.fps * self.duration_s)

    def problems(self) -> list[str]:
        """Every violated invariant."""
        problems: list[str] = []
        height, width = self.resolution
        if height < 8 or width < 8:  # noqa: PLR2004
            problems.append(f"resolution {self.resolution} too small")
        if self.fps <= 0 or self.duration_s <= 0:
            problems.append("fps and duration_s must be > 0")
        if self.background.drift_px_per_s < 0:
            problems.append("background drift must be >= 0")
        if self.label is Label.NEAR_MISS and self.intruder is None:
            problems.append("near_miss clip needs an intruder")
        if self.label is Label.SAFE_DRIVING and self.intruder is not None:
            problems.append("safe_driving clip must not have an intruder")
        if self.intruder is not None and not problems:
            problems.extend(self._intruder_problems(self.intruder))
        return problems

    def _intruder_problems(self, intruder: Intruder) -> list[str]:
        problems: list[str] = []
        if not self.nearmiss_window.contains(intruder.onset_s):
            problems.append(
                f"intruder onset {intruder.onset_s:g} s outside near-miss "
                f"window {self.nearmiss_window}"
            )
        drift = self.background.drift_px_per_s
        if intruder.speed_px_per_s < MIN_SPEED_RATIO * drift or (
            intruder.speed_px_per_s <= 0
        ):
            problems.append(
                f"intruder speed {intruder.speed_px_per_s:g} px/s below "
                f"{MIN_SPEED_RATIO:g}x background drift {drift:g} px/s"
            )
        box_h, box_w = intruder.bbox_size
        if box_h < 1 or box_w < 1:
            problems.append(f"bbox size {intruder.bbox_size} must be >= 1")
            return problems
        trajectory = Trajectory.of(self, intruder)
        for point in (trajectory.start, trajectory.end):
            x0, y0, x1, y1 = trajectory.box_at(point)
            height, width = self.resolution
            if x0 < 0 or y0 < 0 or x1 > width or y1 > height:
                problems.append(
                    f"intruder box {[x0, y0, x1, y1]} leaves the "
                    f"{width}x{height} frame"
                )
                break
        return problems

    def to_dict(self) -> dict[str, Any]:
        """Serialize for ground-truth sidecars."""
        intruder = None
        if self.intruder is not None:
            intruder = {
                "onset_s": self.intruder.onset_s,
                "speed_px_per_s": self.intruder.speed_px_per_s,
                "bbox_size": list(self.intruder.bbox_size),
                "entry_side": self.intruder.entry_side.value,
                "lateral_offset_px": self.intruder.lateral_offset_px,
                "shape": self.intruder.shape.value,
                "color": list(self.intruder.color),
            }
        return {
            "seed": self.seed,
            "label": self.label.value,
            "duration_s": self.duration_s,
            "fps": self.fps,
            "resolution": list(self.resolution),
            "background": {
                "texture_seed": self.background.texture_seed,
                "drift_px_per_s": self.background.drift_px_per_s,
            },
            "intruder": intruder,
        }


@dataclass(frozen=True)
class Trajectory:
    """Straight path of the intruder's center from the edge to the center."""

    start: tuple[float, float]
    end: tuple[float, float]
    size: tuple[int, int]
    onset_s: float
    speed_px_per_s: float

    @classmethod
    def of(cls, spec: SynthClipSpec, intruder: Intruder) -> Self:
        """Path of ``intruder`` inside the frame of ``spec``."""
        height, width = spec.resolution
        box_h, box_w = intruder.bbox_size
        cx, cy = width / 2, height / 2
        offset = intruder.lateral_offset_px
        start = {
            EntrySide.LEFT: (box_w / 2, cy + offset),
            EntrySide.RIGHT: (width - box_w / 2, cy + offset),
            EntrySide.TOP: (cx + offset, box_h / 2),
            EntrySide.BOTTOM: (cx + offset, height - box_h / 2),
        }[intruder.entry_side]
        if intruder.entry_side in {EntrySide.LEFT, EntrySide.RIGHT}:
            end = (cx, cy + offset)
        else:
            end = (cx + offset, cy)
        return cls(
            start=start,
            end=end,
            size=intruder.bbox_size,
            onset_s=intruder.onset_s,
            speed_px_per_s=intruder.speed_px_per_s,
        )

    @property
    def length_px(self) -> float:
        """Distance travelled before the intruder vanishes."""
        return math.dist(self.start, self.end)

    def center_at(self, t: float) -> tuple[float, float] | None:
        """Sprite center at time ``t``; ``None`` when not visible."""
        travelled = (t - self.onset_s) * self.speed_px_per_s
        if travelled < 0 or travelled > self.length_px:
            return None
        if self.length_px == 0:
            return self.start
        fraction = travelled / self.length_px
        return (
            self.start[0] + fraction * (self.end[0] - self.start[0]),
            self.start[1] + fraction * (self.end[1] - self.start[1]),
        )

    def box_at(self, center: tuple[float, float]) -> tuple[int, int, int, int]:
        """Integer ``(x0, y0, x1, y1)`` box, end-exclusive, around ``center``.

        The box is anchored on the rounded top-left corner so its size
        never changes along the path.
        """
        box_h, box_w = self.size
        x0 = round(center[0] - box_w / 2)
        y0 = round(center[1] - box_h / 2)
        return (x0, y0, x0 + box_w, y0 + box_h)


@dataclass(frozen=True)
class GroundTruth:
    """Label and per-frame intruder boxes of one synthetic clip."""

    clip_id: str
    label: Label
    intruder_bboxes: dict[int, tuple[int, int, int, int]]

    def box(self, frame_index: int) -> tuple[int, int, int, int] | None:
        """Intruder box in ``frame_index``, if visible."""
        return self.intruder_bboxes.get(frame_index)

    def to_dict(self) -> dict[str, Any]:
        """Serialize; frames are listed in ascending order."""
        return {
            "clip_id": self.clip_id,
            "label": self.label.value,
            "intruder_bboxes": [
                {"frame": frame, "bbox": list(box)}
                for frame, box in sorted(self.intruder_bboxes.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        """Deserialize from :meth:`to_dict` output."""
        boxes = {
            int(row["frame"]): (
                int(row["bbox"][0]),
                int(row["bbox"][1]),
                int(row["bbox"][2]),
                int(row["bbox"][3]),
            )
            for row in data["intruder_bboxes"]
        }
        return cls(
            clip_id=str(data["clip_id"]),
            label=Label(data["label"]),
            intruder_bboxes=boxes,
        )


def random_spec(  # noqa: PLR0913
    seed: int,
    label: Label,
    *,
    fps: float = DEFAULT_SYNTH_FPS,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
    duration_s: float = DEFAULT_DURATION_S,
    onset_range: tuple[float, float] = DEFAULT_ONSET_RANGE,
    drift_px_per_s: float = DEFAULT_DRIFT_PX_PER_S,
) -> SynthClipSpec:
    """Draw a valid spec for ``label`` from ``seed``.

    Speeds, sizes and offsets scale with the frame width relative to a
    112 px frame.
    """
    rng = np.random.default_rng(seed)
    height, width = resolution
    scale = width / REFERENCE_WIDTH
    texture_seed = int(rng.integers(0, 2**31 - 1))
    background = Background(
        texture_seed=texture_seed, drift_px_per_s=drift_px_per_s * scale
    )
    intruder = None
    if label is Label.NEAR_MISS:
        lo, hi = DEFAULT_BBOX_RANGE
        box_h = round(int(rng.integers(lo, hi, endpoint=True)) * scale)
        box_w = round(int(rng.integers(lo, hi, endpoint=True)) * scale)
        side = EntrySide(
            rng.choice([s.value for s in EntrySide]).item()
        )
        vertical = side in {EntrySide.TOP, EntrySide.BOTTOM}
        across = width if vertical else height
        extent = box_w if vertical else box_h
        max_offset = max(0.0, across / 6 - extent / 2)
        color = [int(c) for c in rng.integers(160, 256, size=3)]
        # one dark channel keeps the sprite saturated
        color[int(rng.integers(0, 3))] = 40
        intruder = Intruder(
            onset_s=round(float(rng.uniform(*onset_range)), 3),
            speed_px_per_s=float(rng.uniform(*DEFAULT_SPEED_RANGE)) * scale,
            bbox_size=(max(box_h, 1), max(box_w, 1)),
            entry_side=side,
            lateral_offset_px=float(rng.uniform(-max_offset, max_offset)),
            shape=SpriteShape(
                rng.choice([s.value for s in SpriteShape]).item()
            ),
            color=(color[0], color[1], color[2]),
        )
    return SynthClipSpec(
        seed=seed,
        label=label,
        background=background,
        intruder=intruder,
        duration_s=duration_s,
        fps=fps,
        resolution=resolution,
    )
