"""Leakage-free train/validation/test splits grouped by source clip."""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from pathlib import Path
from typing import Any, Self

import numpy as np

from nearmiss.core.errors import NearMissError
from nearmiss.core.logger import get_logger
from nearmiss.core.records import read_json, write_json
from nearmiss.data.clips import ClipRecord
from nearmiss.data.segmentation import LabeledSegment

logger = get_logger(__name__)

DEFAULT_RATIO = (6.0, 2.0, 2.0)


class SplitError(NearMissError):
    """Raised when a split cannot be built or read."""


class SplitName(StrEnum):
    """The three dataset partitions."""

    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


@dataclass(frozen=True)
class DatasetSplit:
    """A partition of clip ids; every segment follows its clip."""

    train: frozenset[str]
    validation: frozenset[str]
    test: frozenset[str]
    ratio: tuple[float, float, float]
    seed: int

    def __post_init__(self) -> None:
        """Require pairwise-disjoint parts."""
        if (
            self.train & self.validation
            or self.train & self.test
            or self.validation & self.test
        ):
            msg = "split parts must be pairwise disjoint"
            raise SplitError(msg)

    def part(self, name: SplitName | str) -> frozenset[str]:
        """Clip ids of one partition."""
        return getattr(self, SplitName(name).value)

    def split_of(self, clip_id: str) -> SplitName:
        """Partition holding ``clip_id``.

        Raises:
            SplitError: If the clip belongs to no partition

        """
        for name in SplitName:
            if clip_id in self.part(name):
                return name
        msg = f"clip {clip_id!r} is not part of the split"
        raise SplitError(msg)

    @property
    def sizes(self) -> tuple[int, int, int]:
        """Clip counts of train, validation and test."""
        return (len(self.train), len(self.validation), len(self.test))

    def to_dict(self) -> dict[str, Any]:
        """Serialize with sorted id lists (stable bytes)."""
        return {
            "seed": self.seed,
            "ratio": list(self.ratio),
            "train": sorted(self.train),
            "validation": sorted(self.validation),
            "test": sorted(self.test),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        """Deserialize from :meth:`to_dict` output."""
        try:
            ratio = tuple(float(r) for r in data["ratio"])
            return cls(
                train=frozenset(data["train"]),
                validation=frozenset(data["validation"]),
                test=frozenset(data["test"]),
                ratio=(ratio[0], ratio[1], ratio[2]),
                seed=int(data["seed"]),
            )
        except (KeyError, IndexError, TypeError) as exc:
            msg = f"malformed split file: {exc}"
            raise SplitError(msg) from exc


def split_sizes(n: int, ratio: Sequence[float]) -> tuple[int, int, int]:
    """Split sizes: floor train, floor validation, remainder to test.

    Computed in exact rational arithmetic so 287 clips at 6:2:2 always give
    172 / 57 / 58.
    """
    parts = [Fraction(r).limit_denominator(10**6) for r in ratio]
    total = sum(parts)
    n_train = int(parts[0] * n / total)
    n_val = int(parts[1] * n / total)
    return n_train, n_val, n - n_train - n_val


def ratio_problems(ratio: Sequence[float]) -> list[str]:
    """Reasons ``ratio`` cannot split a corpus (empty when usable)."""
    if len(ratio) != len(SplitName):
        return [f"ratio needs 3 components, got {list(ratio)}"]
    if any(r < 0 for r in ratio) or not any(r > 0 for r in ratio):
        return [f"ratio must be non-negative and not all zero: {list(ratio)}"]
    return []


def _validate_ratio(ratio: Sequence[float]) -> None:
    problems = ratio_problems(ratio)
    if problems:
        raise SplitError(problems[0])


def make_splits(
    clips: Iterable[ClipRecord | str],
    ratio: Sequence[float] = DEFAULT_RATIO,
    seed: int = 0,
) -> DatasetSplit:
    """Partition clips into train/validation/test deterministically.

    Ids are sorted before a seeded permutation, so the result depends only
    on (clip set, ratio, seed), never on input order or platform.

    Args:
        clips: Clip records or clip ids
        ratio: Relative sizes of train, validation, test
        seed: Permutation seed

    Raises:
        SplitError: On an empty set, duplicate ids, an invalid ratio, or
            fewer clips than non-empty parts

    """
    _validate_ratio(ratio)
    ids = [c.clip_id if isinstance(c, ClipRecord) else str(c) for c in clips]
    if not ids:
        msg = "cannot split an empty clip set"
        raise SplitError(msg)
    if len(set(ids)) != len(ids):
        msg = "clip ids must be unique to split by group"
        raise SplitError(msg)
    n_parts = sum(1 for r in ratio if r > 0)
    if len(ids) < n_parts:
        msg = f"{len(ids)} clips cannot fill {n_parts} split parts"
        raise SplitError(msg)

    ordered = sorted(ids)
    permutation = np.random.default_rng(seed).permutation(len(ordered))
    shuffled = [ordered[i] for i in permutation]
    n_train, n_val, _ = split_sizes(len(ids), ratio)
    split = DatasetSplit(
        train=frozenset(shuffled[:n_train]),
        validation=frozenset(shuffled[n_train : n_train + n_val]),
        test=frozenset(shuffled[n_train + n_val :]),
        ratio=(float(ratio[0]), float(ratio[1]), float(ratio[2])),
        seed=seed,
    )
    logger.info(
        "Split %d clips %s with seed %d -> train/val/test = %d/%d/%d",
        len(ids),
        ":".join(f"{r:g}" for r in ratio),
        seed,
        *split.sizes,
    )
    return split


def assign_segments(
    segments: Iterable[LabeledSegment], split: DatasetSplit
) -> dict[SplitName, list[LabeledSegment]]:
    """Group segments by the partition of their source clip."""
    grouped: dict[SplitName, list[LabeledSegment]] = {
        name: [] for name in SplitName
    }
    for segment in segments:
        grouped[split.split_of(segment.clip_id)].append(segment)
    return grouped


def write_splits(path: Path, split: DatasetSplit) -> None:
    """Write the split file (JSON)."""
    write_json(path, split.to_dict())


def read_splits(path: Path) -> DatasetSplit:
    """Read a split file written by :func:`write_splits`."""
    return DatasetSplit.from_dict(read_json(path))
