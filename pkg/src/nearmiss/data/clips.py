"""Clip records and the line-delimited clip manifest."""

from dataclasses import dataclass, replace
from enum import StrEnum
from pathlib import Path
from typing import Any, Self

from nearmiss.core.errors import NearMissError
from nearmiss.core.logger import get_logger
from nearmiss.core.records import iter_jsonl, write_jsonl

logger = get_logger(__name__)

DEFAULT_FPS = 30.0
DEFAULT_DURATION_S = 15.0
DEFAULT_EVENT_TIME_S = 10.0

# Field order of one manifest record; fixed so manifests diff cleanly.
MANIFEST_FIELDS = (
    "clip_id",
    "source_path",
    "fps",
    "duration_s",
    "origin",
    "event_time_s",
)


class ClipStoreError(NearMissError):
    """Raised when a clip record or manifest is invalid."""


class Origin(StrEnum):
    """Provenance of a clip."""

    REAL = "real"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class ClipRecord:
    """A source clip with timing metadata and provenance.

    ``event_time_s`` is the nominal near-miss moment. ``None`` marks a clip
    with no recorded incident (synthetic safe-driving clips).
    """

    clip_id: str
    source_path: Path
    fps: float
    duration_s: float
    n_frames: int
    origin: Origin = Origin.REAL
    event_time_s: float | None = DEFAULT_EVENT_TIME_S

    def __post_init__(self) -> None:
        """Validate the record invariants."""
        if not self.clip_id:
            msg = "clip_id must be a non-empty string"
            raise ClipStoreError(msg)
        if not self.fps > 0:
            msg = f"clip {self.clip_id}: fps must be > 0, got {self.fps}"
            raise ClipStoreError(msg)
        if not self.duration_s > 0:
            msg = (
                f"clip {self.clip_id}: duration_s must be > 0, "
                f"got {self.duration_s}"
            )
            raise ClipStoreError(msg)
        expected = round(self.fps * self.duration_s)
        if abs(self.n_frames - expected) > 1:
            msg = (
                f"clip {self.clip_id}: n_frames={self.n_frames} does not "
                f"match fps*duration={expected} (tolerance 1 frame)"
            )
            raise ClipStoreError(msg)
        if self.event_time_s is not None and not (
            0 < self.event_time_s <= self.duration_s
        ):
            msg = (
                f"clip {self.clip_id}: event_time_s={self.event_time_s} "
                f"outside (0, {self.duration_s}]"
            )
            raise ClipStoreError(msg)

    @classmethod
    def create(  # noqa: PLR0913
        cls,
        clip_id: str,
        source_path: Path | str,
        fps: float = DEFAULT_FPS,
        duration_s: float = DEFAULT_DURATION_S,
        origin: Origin | str = Origin.REAL,
        event_time_s: float | None = DEFAULT_EVENT_TIME_S,
        n_frames: int | None = None,
    ) -> Self:
        """Create a record, deriving ``n_frames`` from fps and duration."""
        if n_frames is None:
            n_frames = round(fps * duration_s)
        return cls(
            clip_id=clip_id,
            source_path=Path(source_path),
            fps=float(fps),
            duration_s=float(duration_s),
            n_frames=n_frames,
            origin=Origin(origin),
            event_time_s=(
                None if event_time_s is None else float(event_time_s)
            ),
        )

    @property
    def has_event(self) -> bool:
        """Whether the clip records a near-miss moment."""
        return self.event_time_s is not None

    def time_of(self, frame_index: int) -> float:
        """Timestamp in seconds of ``frame_index``."""
        return frame_index / self.fps

    def to_manifest_dict(self) -> dict[str, Any]:
        """Serialize in manifest field order."""
        return {
            "clip_id": self.clip_id,
            "source_path": str(self.source_path),
            "fps": self.fps,
            "duration_s": self.duration_s,
            "origin": self.origin.value,
            "event_time_s": self.event_time_s,
        }

    @classmethod
    def from_manifest_dict(
        cls,
        data: dict[str, Any],
        base_dir: Path | None = None,
        default_fps: float = DEFAULT_FPS,
    ) -> Self:
        """Build a record from one manifest line.

        Args:
            data: Decoded manifest record
            base_dir: Directory relative ``source_path`` values resolve
                against (the manifest's directory)
            default_fps: Rate used when the record leaves ``fps`` empty

        Raises:
            ClipStoreError: If a required field is missing or invalid

        """
        unknown = set(data) - set(MANIFEST_FIELDS)
        if unknown:
            msg = f"manifest record has unknown fields: {sorted(unknown)}"
            raise ClipStoreError(msg)
        for key in ("clip_id", "source_path", "duration_s"):
            if data.get(key) in (None, ""):
                msg = f"manifest record missing required field '{key}'"
                raise ClipStoreError(msg)
        source = Path(data["source_path"])
        if base_dir is not None and not source.is_absolute():
            source = base_dir / source
        fps = data.get("fps")
        try:
            return cls.create(
                clip_id=str(data["clip_id"]),
                source_path=source,
                fps=default_fps if fps is None else float(fps),
                duration_s=float(data["duration_s"]),
                origin=data.get("origin") or Origin.REAL,
                event_time_s=data.get("event_time_s", DEFAULT_EVENT_TIME_S),
            )
        except ValueError as exc:
            msg = f"manifest record {data.get('clip_id')!r}: {exc}"
            raise ClipStoreError(msg) from exc

    def relative_to(self, base_dir: Path) -> Self:
        """Return a copy whose source path is relative to ``base_dir``."""
        try:
            return replace(
                self, source_path=self.source_path.relative_to(base_dir)
            )
        except ValueError:
            return self


def read_manifest(
    path: Path, default_fps: float = DEFAULT_FPS
) -> list[ClipRecord]:
    """Load a clip manifest, preserving line order.

    Raises:
        ClipStoreError: On duplicate ids or invalid records
        FileNotFoundError: If the manifest doesn't exist

    """
    clips: list[ClipRecord] = []
    seen: set[str] = set()
    for line_no, data in enumerate(iter_jsonl(path), start=1):
        try:
            clip = ClipRecord.from_manifest_dict(
                data, base_dir=path.parent, default_fps=default_fps
            )
        except ClipStoreError as exc:
            msg = f"{path}:{line_no}: {exc}"
            raise ClipStoreError(msg) from exc
        if clip.clip_id in seen:
            msg = f"{path}:{line_no}: duplicate clip_id {clip.clip_id!r}"
            raise ClipStoreError(msg)
        seen.add(clip.clip_id)
        clips.append(clip)
    logger.info("Loaded %d clips from %s", len(clips), path)
    return clips


def write_manifest(path: Path, clips: list[ClipRecord]) -> None:
    """Write ``clips`` as a manifest, paths relative to the manifest dir."""
    base = path.parent
    write_jsonl(
        path, (clip.relative_to(base).to_manifest_dict() for clip in clips)
    )
    logger.info("Wrote manifest with %d clips to %s", len(clips), path)

