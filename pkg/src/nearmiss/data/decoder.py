"""Pluggable frame decoders.

The pipeline only needs "frames at these indices" from a clip. Two
decoders ship: numbered image directories (bit-exact, no codec) and video
files read through OpenCV.
"""

import re
from collections.abc import Sequence
from functools import lru_cache
from pathlib import Path
from typing import Protocol

import cv2
import numpy as np

from nearmiss.core.errors import NearMissError
from nearmiss.core.logger import get_logger
from nearmiss.data.clips import ClipRecord

logger = get_logger(__name__)

FRAME_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")
_NUMBER = re.compile(r"(\d+)")


class DecodeError(NearMissError):
    """Raised when frames cannot be read from a clip source."""


class FrameDecoder(Protocol):
    """Reads RGB frames of a clip as a ``(N, H, W, 3)`` uint8 volume."""

    def read(
        self, clip: ClipRecord, indices: Sequence[int]
    ) -> np.ndarray:  # pragma: no cover - protocol
        """Return frames ``indices`` of ``clip`` in the requested order."""
        ...


@lru_cache(maxsize=4096)
def _list_frames(directory: Path) -> tuple[Path, ...]:
    files = [
        p
        for p in directory.iterdir()
        if p.suffix.lower() in FRAME_SUFFIXES and _NUMBER.search(p.stem)
    ]

    def frame_number(path: Path) -> int:
        return int(_NUMBER.findall(path.stem)[-1])

    return tuple(sorted(files, key=frame_number))


def read_image_rgb(path: Path) -> np.ndarray:
    """Read an image file as an RGB uint8 array.

    Raises:
        DecodeError: If OpenCV cannot decode the file

    """
    image = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if image is None:
        msg = f"cannot decode image {path}"
        raise DecodeError(msg)
    return cv2.cvtColor(image, cv2.COLOR_BGR2RGB)


class ImageDirDecoder:
    """Decoder for a directory of numbered frame images."""

    def read(self, clip: ClipRecord, indices: Sequence[int]) -> np.ndarray:
        """Read frames by position in numeric filename order."""
        directory = clip.source_path
        if not directory.is_dir():
            msg = f"frame directory not found: {directory}"
            raise DecodeError(msg)
        files = _list_frames(directory)
        frames = []
        for index in indices:
            if not 0 <= index < len(files):
                msg = (
                    f"clip {clip.clip_id}: frame {index} out of range "
                    f"(directory holds {len(files)} frames)"
                )
                raise DecodeError(msg)
            frames.append(read_image_rgb(files[index]))
        return np.stack(frames)


class VideoFileDecoder:
    """Decoder for codec-backed video files via ``cv2.VideoCapture``."""

    def read(self, clip: ClipRecord, indices: Sequence[int]) -> np.ndarray:
        """Seek to the first wanted frame and read forward."""
        if not clip.source_path.is_file():
            msg = f"video file not found: {clip.source_path}"
            raise DecodeError(msg)
        wanted = sorted(set(indices))
        if not wanted:
            msg = f"clip {clip.clip_id}: no frame indices requested"
            raise DecodeError(msg)
        capture = cv2.VideoCapture(str(clip.source_path))
        if not capture.isOpened():
            msg = f"cannot open video {clip.source_path}"
            raise DecodeError(msg)
        decoded: dict[int, np.ndarray] = {}
        try:
            capture.set(cv2.CAP_PROP_POS_FRAMES, wanted[0])
            position = wanted[0]
            for index in wanted:
                while position <= index:
                    ok, frame = capture.read()
                    if not ok:
                        msg = (
                            f"clip {clip.clip_id}: video ended before "
                            f"frame {index}"
                        )
                        raise DecodeError(msg)
                    if position == index:
                        decoded[index] = cv2.cvtColor(
                            frame, cv2.COLOR_BGR2RGB
                        )
                    position += 1
        finally:
            capture.release()
        return np.stack([decoded[i] for i in indices])


def decoder_for(clip: ClipRecord) -> FrameDecoder:
    """Pick the decoder matching the clip's source path."""
    if clip.source_path.is_dir():
        return ImageDirDecoder()
    return VideoFileDecoder()
