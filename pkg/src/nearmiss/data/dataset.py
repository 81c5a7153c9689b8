"""Torch dataset turning labeled segments into normalized tensor pairs."""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Self

import numpy as np
import torch
from torch.utils.data import Dataset

from nearmiss.core.logger import get_logger
from nearmiss.core.records import read_json, write_json
from nearmiss.core.seeding import item_rng
from nearmiss.data.augment import center_crop, scale_jitter
from nearmiss.data.clips import ClipRecord
from nearmiss.data.sampling import FramePair, SamplingError, sample_frames
from nearmiss.data.segmentation import LabeledSegment
from nearmiss.model.config import PathwayConfig

logger = get_logger(__name__)

_MAX_INTENSITY = 255.0


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel RGB mean and standard deviation on a ``[0, 1]`` scale."""

    mean: tuple[float, float, float]
    std: tuple[float, float, float]

    def normalize(self, frames: np.ndarray) -> torch.Tensor:
        """``(T, H, W, C)`` uint8 volume to a normalized ``(C, T, H, W)``."""
        volume = torch.from_numpy(
            np.ascontiguousarray(frames, dtype=np.float32) / _MAX_INTENSITY
        )
        mean = torch.tensor(self.mean, dtype=torch.float32)
        std = torch.tensor(self.std, dtype=torch.float32)
        return ((volume - mean) / std).permute(3, 0, 1, 2).contiguous()

    def to_dict(self) -> dict[str, Any]:
        """Serialize as JSON-ready lists."""
        return {"mean": list(self.mean), "std": list(self.std)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Deserialize from :meth:`to_dict` output."""
        mean = [float(v) for v in data["mean"]]
        std = [float(v) for v in data["std"]]
        return cls(
            mean=(mean[0], mean[1], mean[2]), std=(std[0], std[1], std[2])
        )


IDENTITY_STATS = ChannelStats(mean=(0.0, 0.0, 0.0), std=(1.0, 1.0, 1.0))


def channel_stats(
    segments: Sequence[LabeledSegment],
    clips: Mapping[str, ClipRecord],
    cfg: PathwayConfig,
) -> ChannelStats:
    """Estimate normalization statistics over the given segments.

    Uses the deterministic fast frames of each segment at native
    resolution. Callers pass training segments only.
    """
    total = np.zeros(3, dtype=np.float64)
    total_sq = np.zeros(3, dtype=np.float64)
    count = 0
    for segment in segments:
        pair = sample_frames(segment, clips[segment.clip_id], cfg)
        pixels = pair.fast_frames.reshape(-1, 3).astype(np.float64)
        pixels /= _MAX_INTENSITY
        total += pixels.sum(axis=0)
        total_sq += np.square(pixels).sum(axis=0)
        count += pixels.shape[0]
    if count == 0:
        msg = "cannot estimate channel statistics from zero segments"
        raise SamplingError(msg)
    mean = total / count
    std = np.sqrt(np.maximum(total_sq / count - mean**2, 0.0))
    std = np.maximum(std, 1e-6)
    stats = ChannelStats(
        mean=(float(mean[0]), float(mean[1]), float(mean[2])),
        std=(float(std[0]), float(std[1]), float(std[2])),
    )
    logger.info(
        "Channel stats over %d segments: mean %s std %s",
        len(segments),
        np.round(mean, 4).tolist(),
        np.round(std, 4).tolist(),
    )
    return stats


def write_channel_stats(path: Path, stats: ChannelStats) -> None:
    """Write normalization statistics as JSON."""
    write_json(path, stats.to_dict())


def read_channel_stats(path: Path) -> ChannelStats:
    """Read statistics written by :func:`write_channel_stats`."""
    return ChannelStats.from_dict(read_json(path))


class SegmentDataset(Dataset[tuple[torch.Tensor, torch.Tensor, int]]):
    """Labeled segments as ``(slow, fast, label)`` tensors.

    Training mode applies a random temporal offset and scale jitter drawn
    from a generator keyed by ``(seed, epoch, index)``, so an item depends
    only on those three numbers. Evaluation mode samples stride centers
    and center-crops.
    """

    def __init__(  # noqa: PLR0913
        self,
        segments: Sequence[LabeledSegment],
        clips: Mapping[str, ClipRecord],
        cfg: PathwayConfig,
        stats: ChannelStats = IDENTITY_STATS,
        *,
        train: bool = False,
        seed: int = 0,
        short_side_range: tuple[int, int] = (256, 320),
        crop_size: int = 224,
    ) -> None:
        """Bind segments to their clips and the transform settings."""
        missing = {s.clip_id for s in segments} - set(clips)
        if missing:
            msg = f"segments reference unknown clips: {sorted(missing)[:5]}"
            raise SamplingError(msg)
        self.segments = list(segments)
        self.clips = clips
        self.cfg = cfg
        self.stats = stats
        self.train = train
        self.seed = seed
        self.short_side_range = short_side_range
        self.crop_size = crop_size
        self.epoch = 0

    def set_epoch(self, epoch: int) -> None:
        """Select the epoch keying training-time randomness."""
        self.epoch = epoch

    @property
    def labels(self) -> list[int]:
        """Class index of every item."""
        return [s.label.index for s in self.segments]

    def __len__(self) -> int:
        """Number of segments."""
        return len(self.segments)

    def frame_pair(self, index: int) -> FramePair:
        """Transformed uint8 frames of item ``index`` (before normalizing)."""
        segment = self.segments[index]
        clip = self.clips[segment.clip_id]
        if self.train:
            rng = item_rng(self.seed, self.epoch, index)
            pair = sample_frames(segment, clip, self.cfg, rng=rng)
            fast = scale_jitter(
                pair.fast_frames,
                self.short_side_range,
                seed=rng,
                crop_size=self.crop_size,
            )
        else:
            pair = sample_frames(segment, clip, self.cfg)
            fast = center_crop(
                pair.fast_frames, self.short_side_range[0], self.crop_size
            )
        return FramePair(
            slow_frames=fast[:: self.cfg.alpha],
            fast_frames=fast,
            slow_indices=pair.slow_indices,
            fast_indices=pair.fast_indices,
            alpha=self.cfg.alpha,
        )

    def __getitem__(
        self, index: int
    ) -> tuple[torch.Tensor, torch.Tensor, int]:
        """Normalized ``(C, T, H, W)`` slow and fast tensors and the label."""
        pair = self.frame_pair(index)
        return (
            self.stats.normalize(pair.slow_frames),
            self.stats.normalize(pair.fast_frames),
            self.segments[index].label.index,
        )
