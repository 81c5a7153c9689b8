"""Synthetic corpus generation: frames, ground-truth sidecars, manifest."""

from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from nearmiss.core.labels import Label
from nearmiss.core.logger import get_logger
from nearmiss.core.records import read_json, write_json
from nearmiss.data.clips import ClipRecord, Origin, write_manifest
from nearmiss.data.segmentation import DEFAULT_POLICY
from nearmiss.synth.render import generate_clip
from nearmiss.synth.spec import (
    DEFAULT_DURATION_S,
    DEFAULT_RESOLUTION,
    DEFAULT_SYNTH_FPS,
    GroundTruth,
    SynthSpecError,
    random_spec,
)

logger = get_logger(__name__)

FRAME_PATTERN = "frame_{:06d}.png"


@dataclass(frozen=True)
class SynthCorpus:
    """A generated corpus: manifest records and ground truth by clip id."""

    root: Path
    clips: list[ClipRecord]
    truths: dict[str, GroundTruth]

    @property
    def manifest(self) -> Path:
        """Location of the written manifest."""
        return self.root / "manifest.jsonl"


def clip_seed(master_seed: int, index: int) -> int:
    """Seed of clip ``index``: first word of ``SeedSequence([m, i])``."""
    state = np.random.SeedSequence([master_seed, index]).generate_state(1)
    return int(state[0])


def near_miss_indices(n: int, balance: float, master_seed: int) -> set[int]:
    """Indices of the ``round(balance * n)`` near-miss clips.

    ``round`` is Python's half-to-even rule: 287 clips at 0.5 give 144.
    """
    count = round(balance * n)
    order = np.random.default_rng(master_seed).permutation(n)
    return {int(i) for i in order[:count]}


def write_frames(directory: Path, frames: np.ndarray) -> None:
    """Write an RGB volume as numbered PNG files.

    Raises:
        OSError: If OpenCV fails to write a frame

    """
    directory.mkdir(parents=True, exist_ok=True)
    for index, frame in enumerate(frames):
        path = directory / FRAME_PATTERN.format(index)
        if not cv2.imwrite(str(path), cv2.cvtColor(frame, cv2.COLOR_RGB2BGR)):
            msg = f"failed to write frame {path}"
            raise OSError(msg)


def truth_path(root: Path, clip_id: str) -> Path:
    """Sidecar location of ``clip_id`` under a corpus root."""
    return root / "truth" / f"{clip_id}.json"


def read_ground_truth(path: Path) -> GroundTruth:
    """Load a ground-truth sidecar."""
    return GroundTruth.from_dict(read_json(path))


def read_truths(root: Path, clip_ids: Iterable[str]) -> dict[str, GroundTruth]:
    """Load the sidecars of ``clip_ids`` that exist under ``root``."""
    truths: dict[str, GroundTruth] = {}
    for clip_id in clip_ids:
        path = truth_path(root, clip_id)
        if path.exists():
            truths[clip_id] = read_ground_truth(path)
    return truths


def generate_corpus(  # noqa: PLR0913
    n: int,
    balance: float,
    master_seed: int,
    out_dir: Path,
    *,
    fps: float = DEFAULT_SYNTH_FPS,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
    duration_s: float = DEFAULT_DURATION_S,
    workers: int = 1,
) -> SynthCorpus:
    """Render ``n`` clips and write them as a clip-store corpus.

    Layout under ``out_dir``: ``clips/<id>/frame_NNNNNN.png``,
    ``truth/<id>.json`` and ``manifest.jsonl``. Output is ordered by
    clip index whatever the worker count.

    Args:
        n: Number of clips
        balance: Fraction of near-miss clips
        master_seed: Seed every per-clip seed derives from
        out_dir: Corpus root
        fps: Frame rate of every clip
        resolution: ``(H, W)`` of every clip
        duration_s: Clip duration
        workers: Rendering threads

    Raises:
        SynthSpecError: If ``n`` or ``balance`` is out of range

    """
    if n <= 0:
        msg = f"corpus size must be > 0, got {n}"
        raise SynthSpecError(msg)
    if not 0.0 <= balance <= 1.0:
        msg = f"balance must be in [0, 1], got {balance}"
        raise SynthSpecError(msg)
    positives = near_miss_indices(n, balance, master_seed)
    event_time_s = DEFAULT_POLICY.nearmiss_window.hi_s

    def build(index: int) -> tuple[ClipRecord, GroundTruth]:
        clip_id = f"synth_{index:05d}"
        label = Label.NEAR_MISS if index in positives else Label.SAFE_DRIVING
        spec = random_spec(
            clip_seed(master_seed, index),
            label,
            fps=fps,
            resolution=resolution,
            duration_s=duration_s,
        )
        frames, truth = generate_clip(spec, clip_id)
        clip_dir = out_dir / "clips" / clip_id
        write_frames(clip_dir, frames)
        write_json(
            truth_path(out_dir, clip_id),
            {**truth.to_dict(), "spec": spec.to_dict()},
        )
        record = ClipRecord.create(
            clip_id=clip_id,
            source_path=clip_dir,
            fps=fps,
            duration_s=duration_s,
            origin=Origin.SYNTHETIC,
            event_time_s=event_time_s if label is Label.NEAR_MISS else None,
            n_frames=spec.n_frames,
        )
        return record, truth

    logger.info(
        "Generating %d synthetic clips (%d near-miss) with master seed %d",
        n,
        len(positives),
        master_seed,
    )
    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        results = list(pool.map(build, range(n)))
    clips = [record for record, _ in results]
    truths = {truth.clip_id: truth for _, truth in results}
    corpus = SynthCorpus(root=out_dir, clips=clips, truths=truths)
    write_manifest(corpus.manifest, clips)
    return corpus
