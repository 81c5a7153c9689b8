"""Tests for clip records and the manifest."""

from pathlib import Path

import pytest

from nearmiss.core.records import write_jsonl
from nearmiss.data.clips import (
    ClipRecord,
    ClipStoreError,
    Origin,
    read_manifest,
    write_manifest,
)


class TestClipRecord:
    """Test record invariants."""

    def test_create_derives_frame_count(self, tmp_path: Path) -> None:
        """Test that n_frames comes from fps and duration."""
        clip = ClipRecord.create("a", tmp_path / "a.mp4", fps=30.0)

        assert clip.n_frames == 450
        assert clip.origin is Origin.REAL
        assert clip.event_time_s == 10.0
        assert clip.time_of(150) == 5.0

    def test_frame_count_tolerance(self, tmp_path: Path) -> None:
        """Test that one frame of slack is accepted and two are not."""
        ClipRecord.create("a", tmp_path, n_frames=451)

        with pytest.raises(ClipStoreError, match="n_frames=452"):
            ClipRecord.create("a", tmp_path, n_frames=452)

    @pytest.mark.parametrize(
        ("kwargs", "message"),
        [
            ({"fps": 0.0}, "fps must be > 0"),
            ({"duration_s": -1.0}, "duration_s must be > 0"),
            ({"event_time_s": 16.0}, "event_time_s=16.0"),
            ({"event_time_s": 0.0}, "event_time_s=0.0"),
        ],
    )
    def test_invalid_records(
        self, tmp_path: Path, kwargs: dict[str, float], message: str
    ) -> None:
        """Test that invalid timing is rejected with the clip id."""
        with pytest.raises(ClipStoreError, match=message):
            ClipRecord.create("a", tmp_path, **kwargs)

    def test_synthetic_safe_clip_has_no_event(self, tmp_path: Path) -> None:
        """Test that a missing event time means no incident."""
        clip = ClipRecord.create(
            "s", tmp_path, fps=10.0, origin="synthetic", event_time_s=None
        )

        assert not clip.has_event
        assert clip.origin is Origin.SYNTHETIC


class TestManifest:
    """Test manifest reading and writing."""

    def test_paths_stored_relative(self, tmp_path: Path) -> None:
        """Test that sources under the manifest dir are made relative."""
        clip = ClipRecord.create("a", tmp_path / "clips" / "a")
        manifest = tmp_path / "manifest.jsonl"

        write_manifest(manifest, [clip])

        assert '"source_path":"clips/a"' in manifest.read_text()
        assert read_manifest(manifest) == [clip]

    def test_default_fps(self, tmp_path: Path) -> None:
        """Test that an empty fps falls back to the default rate."""
        manifest = tmp_path / "manifest.jsonl"
        write_jsonl(
            manifest,
            [{"clip_id": "a", "source_path": "a.mp4", "duration_s": 15}],
        )

        (clip,) = read_manifest(manifest, default_fps=25.0)

        assert clip.fps == 25.0
        assert clip.n_frames == 375
        assert clip.source_path == tmp_path / "a.mp4"

    def test_duplicate_ids(self, tmp_path: Path) -> None:
        """Test that a repeated clip id names the offending line."""
        manifest = tmp_path / "manifest.jsonl"
        row = {"clip_id": "a", "source_path": "a.mp4", "duration_s": 15}
        write_jsonl(manifest, [row, row])

        with pytest.raises(ClipStoreError, match=r"manifest.jsonl:2"):
            read_manifest(manifest)

    def test_unknown_field(self, tmp_path: Path) -> None:
        """Test that unexpected fields are rejected."""
        manifest = tmp_path / "manifest.jsonl"
        write_jsonl(
            manifest,
            [
                {
                    "clip_id": "a",
                    "source_path": "a.mp4",
                    "duration_s": 15,
                    "weather": "rain",
                }
            ],
        )

        with pytest.raises(ClipStoreError, match="weather"):
            read_manifest(manifest)

    def test_missing_required_field(self, tmp_path: Path) -> None:
        """Test that a record without duration is rejected."""
        manifest = tmp_path / "manifest.jsonl"
        write_jsonl(manifest, [{"clip_id": "a", "source_path": "a.mp4"}])

        with pytest.raises(ClipStoreError, match="duration_s"):
            read_manifest(manifest)
