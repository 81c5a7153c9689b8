"""Tests for clip-grouped dataset splits."""

from pathlib import Path

import pytest

from nearmiss.data.clips import ClipRecord
from nearmiss.data.segmentation import segment_corpus
from nearmiss.data.splits import (
    SplitError,
    SplitName,
    assign_segments,
    make_splits,
    read_splits,
    split_sizes,
    write_splits,
)

CLIP_IDS = [f"clip_{i:03d}" for i in range(287)]


class TestSplitSizes:
    """Test partition sizes."""

    def test_reference_corpus(self) -> None:
        """Test that 287 clips at 6:2:2 give 172 / 57 / 58."""
        assert split_sizes(287, (6, 2, 2)) == (172, 57, 58)

    def test_fractional_ratio(self) -> None:
        """Test that a ratio summing to one behaves like integers."""
        assert split_sizes(287, (0.6, 0.2, 0.2)) == (172, 57, 58)

    def test_remainder_goes_to_test(self) -> None:
        """Test that rounding never loses a clip."""
        assert sum(split_sizes(11, (1, 1, 1))) == 11


class TestMakeSplits:
    """Test the seeded partition."""

    def test_sizes_and_disjointness(self) -> None:
        """Test the partition of the reference corpus."""
        split = make_splits(CLIP_IDS, (6, 2, 2), seed=0)

        assert split.sizes == (172, 57, 58)
        assert split.train | split.validation | split.test == set(CLIP_IDS)

    def test_input_order_irrelevant(self) -> None:
        """Test that shuffled input gives the same partition."""
        forward = make_splits(CLIP_IDS, seed=3)
        backward = make_splits(list(reversed(CLIP_IDS)), seed=3)

        assert forward == backward

    def test_seed_changes_partition(self) -> None:
        """Test that another seed moves clips between parts."""
        assert make_splits(CLIP_IDS, seed=0) != make_splits(CLIP_IDS, seed=1)

    @pytest.mark.parametrize(
        ("ids", "ratio", "message"),
        [
            ([], (6, 2, 2), "empty"),
            (["a", "a", "b"], (6, 2, 2), "unique"),
            (["a", "b"], (6, 2, 2), "cannot fill"),
            (["a", "b", "c"], (1, 1), "3 components"),
            (["a", "b", "c"], (0, 0, 0), "not all zero"),
            (["a", "b", "c"], (1, -1, 1), "non-negative"),
        ],
    )
    def test_invalid_requests(
        self, ids: list[str], ratio: tuple[float, ...], message: str
    ) -> None:
        """Test that impossible splits are rejected."""
        with pytest.raises(SplitError, match=message):
            make_splits(ids, ratio)

    def test_file_round_trip(self, tmp_path: Path) -> None:
        """Test that a written split reads back equal."""
        split = make_splits(CLIP_IDS[:20], seed=5)
        path = tmp_path / "splits.json"

        write_splits(path, split)

        assert read_splits(path) == split


class TestAssignSegments:
    """Test that segments follow their clip."""

    def test_no_clip_in_two_parts(self, tmp_path: Path) -> None:
        """Test that both segments of a clip land in the same part."""
        clips = [ClipRecord.create(f"c{i}", tmp_path) for i in range(10)]
        split = make_splits(clips, seed=2)

        grouped = assign_segments(segment_corpus(clips), split)

        owners: dict[str, set[SplitName]] = {}
        for name, segments in grouped.items():
            for segment in segments:
                owners.setdefault(segment.clip_id, set()).add(name)
        assert all(len(parts) == 1 for parts in owners.values())
        assert sum(len(s) for s in grouped.values()) == 20

    def test_unknown_clip(self, dashcam_clip: ClipRecord) -> None:
        """Test that a segment of an unsplit clip is rejected."""
        split = make_splits(["x", "y", "z"])

        with pytest.raises(SplitError, match="c1"):
            assign_segments(segment_corpus([dashcam_clip]), split)

    @pytest.mark.slow
    def test_no_leakage_over_many_seeds(self, tmp_path: Path) -> None:
        """Test group integrity and sizes of the reference corpus."""
        clips = [ClipRecord.create(clip_id, tmp_path) for clip_id in CLIP_IDS]
        segments = segment_corpus(clips)

        for seed in range(1000):
            split = make_splits(clips, (6, 2, 2), seed=seed)
            grouped = assign_segments(segments, split)

            assert split.sizes == (172, 57, 58), seed
            for name, part in grouped.items():
                assert {s.clip_id for s in part} <= split.part(name), seed
            assert sum(len(part) for part in grouped.values()) == len(
                segments
            )
