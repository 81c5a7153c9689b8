"""External gaze-saliency maps and their overlap with heatmaps.

Saliency files are grayscale 8- or 16-bit images (any OpenCV-readable
format) or whitespace/comma separated numeric grids (``.txt``, ``.csv``).
A map covers the whole source frame at any resolution. Before comparison
it is cut to the evaluation crop and resampled bilinearly to the heatmap.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import cv2
import numpy as np

from nearmiss.core.logger import get_logger
from nearmiss.data.augment import CropGeometry
from nearmiss.explain.gradcam import ExplainError
from nearmiss.model.config import Pathway

logger = get_logger(__name__)

TEXT_SUFFIXES = {".txt": None, ".csv": ","}
DEFAULT_TOP_FRACTION = 0.2


class SaliencyError(ExplainError):
    """Raised for an unreadable or invalid saliency map."""


@dataclass(frozen=True)
class SaliencyMap:
    """Non-negative 2D map normalized to sum 1."""

    values: np.ndarray
    source: str = ""

    @property
    def shape(self) -> tuple[int, int]:
        """``(H, W)``."""
        return int(self.values.shape[0]), int(self.values.shape[1])


def _validated(grid: np.ndarray, origin: str) -> np.ndarray:
    values = np.asarray(grid, dtype=np.float64)
    if values.ndim != 2 or values.size == 0:  # noqa: PLR2004
        msg = f"{origin}: expected a 2D map, got shape {values.shape}"
        raise SaliencyError(msg)
    if not np.isfinite(values).all():
        msg = f"{origin}: map contains NaN or infinite cells"
        raise SaliencyError(msg)
    if (values < 0).any():
        msg = f"{origin}: map contains negative cells"
        raise SaliencyError(msg)
    total = values.sum()
    if total <= 0:
        msg = f"{origin}: map is zero everywhere"
        raise SaliencyError(msg)
    return values / total


def _read_grid(path: Path) -> np.ndarray:
    suffix = path.suffix.lower()
    if suffix in TEXT_SUFFIXES:
        try:
            return np.loadtxt(path, delimiter=TEXT_SUFFIXES[suffix], ndmin=2)
        except ValueError as exc:
            msg = f"cannot parse numeric grid {path}: {exc}"
            raise SaliencyError(msg) from exc
    image = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if image is None:
        msg = (
            f"cannot decode {path}; expected a grayscale 8/16-bit image "
            "or a .txt/.csv numeric grid"
        )
        raise SaliencyError(msg)
    if image.ndim == 3:  # noqa: PLR2004
        has_alpha = image.shape[2] == 4  # noqa: PLR2004
        code = cv2.COLOR_BGRA2GRAY if has_alpha else cv2.COLOR_BGR2GRAY
        image = cv2.cvtColor(image, code)
    return image


def load_saliency(path: Path, source: str | None = None) -> SaliencyMap:
    """Read a saliency map and normalize it to sum 1.

    Raises:
        SaliencyError: If the file is missing or unreadable, or holds
            negative, NaN or all-zero values

    """
    if not path.exists():
        msg = f"saliency map not found: {path}"
        raise SaliencyError(msg)
    values = _validated(_read_grid(path), str(path))
    logger.debug("Loaded saliency %s %s", path, values.shape)
    return SaliencyMap(values=values, source=source or path.stem)


def save_saliency(path: Path, values: np.ndarray, bit_depth: int = 8) -> Path:
    """Write a map as a numeric grid or a max-scaled grayscale image.

    Text suffixes keep full precision; images store ``values / max``
    quantized to ``bit_depth`` (8 or 16) bits.

    Raises:
        SaliencyError: If the map is invalid or the depth unsupported

    """
    grid = _validated(values, str(path))
    path.parent.mkdir(parents=True, exist_ok=True)
    suffix = path.suffix.lower()
    if suffix in TEXT_SUFFIXES:
        np.savetxt(path, grid, delimiter=TEXT_SUFFIXES[suffix] or " ")
        return path
    dtypes = {8: np.uint8, 16: np.uint16}
    if bit_depth not in dtypes:
        msg = f"bit depth must be 8 or 16, got {bit_depth}"
        raise SaliencyError(msg)
    full = float(np.iinfo(dtypes[bit_depth]).max)
    image = np.rint(grid / grid.max() * full).astype(dtypes[bit_depth])
    if not cv2.imwrite(str(path), image):
        msg = f"cannot write saliency image {path}"
        raise SaliencyError(msg)
    return path


def resample(values: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Bilinear resize of a 2D map to ``(H, W)``."""
    if values.shape == shape:
        return np.asarray(values, dtype=np.float64)
    resized = cv2.resize(
        np.asarray(values, dtype=np.float32),
        (shape[1], shape[0]),
        interpolation=cv2.INTER_LINEAR,
    )
    return resized.astype(np.float64)


def crop_saliency(
    saliency: SaliencyMap, geometry: CropGeometry
) -> SaliencyMap:
    """Cut a whole-frame map down to the region an evaluation crop sees.

    The map is resampled to the rescaled frame size and cropped where
    :func:`~nearmiss.data.augment.center_crop` cuts the frames, so its
    cells line up with the heatmap's. A crop that holds none of the mass
    stays all zero.
    """
    scaled = resample(saliency.values, geometry.scaled_size)
    size = geometry.crop_size
    window = scaled[
        geometry.top : geometry.top + size,
        geometry.left : geometry.left + size,
    ]
    total = window.sum()
    if total > 0:
        window = window / total
    else:
        logger.debug("Saliency %s has no mass inside crop", saliency.source)
    return SaliencyMap(values=window, source=saliency.source)


def pearson_cc(a: np.ndarray, b: np.ndarray) -> float | None:
    """Pearson correlation over cells; ``None`` if either map is flat."""
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    x = x - x.mean()
    y = y - y.mean()
    denom = np.sqrt((x * x).sum() * (y * y).sum())
    if denom == 0:
        return None
    return float(np.clip((x * y).sum() / denom, -1.0, 1.0))


def top_mask(values: np.ndarray, fraction: float) -> np.ndarray:
    """Boolean mask of the ``fraction`` highest cells (at least one).

    Ties are broken by cell order, so the mask size is exact.
    """
    flat = np.asarray(values, dtype=np.float64).ravel()
    k = max(1, round(fraction * flat.size))
    mask = np.zeros(flat.size, dtype=bool)
    mask[np.argsort(-flat, kind="stable")[:k]] = True
    return mask.reshape(np.shape(values))


@dataclass(frozen=True)
class OverlapReport:
    """Agreement between one heatmap frame and one saliency map."""

    pearson_cc: float
    iou_at_threshold: float
    threshold: float
    pathway: Pathway
    cc_undefined: bool = False
    frame: int = 0

    def to_dict(self) -> dict[str, Any]:
        """One JSONL row."""
        return {
            "frame": self.frame,
            "pathway": self.pathway.value,
            "pearson_cc": self.pearson_cc,
            "cc_undefined": self.cc_undefined,
            "iou_at_threshold": self.iou_at_threshold,
            "threshold": self.threshold,
        }


def compare_maps(
    heatmap: np.ndarray,
    saliency: SaliencyMap,
    *,
    threshold: float = DEFAULT_TOP_FRACTION,
    pathway: Pathway = Pathway.FAST,
    frame: int = 0,
    geometry: CropGeometry | None = None,
) -> OverlapReport:
    """Correlation and top-region IoU of a heatmap against a saliency map.

    With ``geometry`` the saliency map is first cut to the crop the
    heatmap was computed on. It is then resampled to the heatmap's
    resolution. A flat map leaves the correlation undefined (reported
    as 0 with a flag); the IoU of the top ``threshold`` fraction of
    cells is always computed.

    Raises:
        SaliencyError: If ``heatmap`` is not 2D or ``threshold`` is
            outside ``(0, 1]``

    """
    h = np.asarray(heatmap, dtype=np.float64)
    if h.ndim != 2:  # noqa: PLR2004
        msg = f"heatmap must be 2D, got shape {h.shape}"
        raise SaliencyError(msg)
    if not 0 < threshold <= 1:
        msg = f"threshold must be in (0, 1], got {threshold}"
        raise SaliencyError(msg)
    if geometry is not None:
        saliency = crop_saliency(saliency, geometry)
    s = resample(saliency.values, (h.shape[0], h.shape[1]))
    cc = pearson_cc(h, s)
    mask_h, mask_s = top_mask(h, threshold), top_mask(s, threshold)
    union = int((mask_h | mask_s).sum())
    iou = int((mask_h & mask_s).sum()) / union
    return OverlapReport(
        pearson_cc=0.0 if cc is None else cc,
        iou_at_threshold=iou,
        threshold=threshold,
        pathway=pathway,
        cc_undefined=cc is None,
        frame=frame,
    )
