"""Frame-difference motion energy and the trivial event detector.

The detector scores a clip by how much more pixel change its near-miss
window holds than its safe window. On a learnable corpus it separates the
classes almost perfectly; it is the baseline a motion-sensitive network
has to match.
"""

from collections.abc import Sequence

import numpy as np
from scipy import stats

from nearmiss.data.clips import ClipRecord
from nearmiss.data.decoder import decoder_for
from nearmiss.data.segmentation import DEFAULT_POLICY, SegmentationPolicy


def motion_energy(frames: np.ndarray) -> np.ndarray:
    """Mean absolute difference between consecutive frames.

    Returns:
        ``len(frames) - 1`` values, one per frame transition

    """
    if len(frames) < 2:  # noqa: PLR2004
        return np.zeros(0, dtype=np.float64)
    volume = frames.astype(np.int16)
    diffs = np.abs(np.diff(volume, axis=0))
    return diffs.reshape(len(diffs), -1).mean(axis=1).astype(np.float64)


def detector_score(
    frames: np.ndarray,
    fps: float,
    policy: SegmentationPolicy = DEFAULT_POLICY,
) -> float:
    """Mean motion energy in the near-miss window minus the safe window."""
    energy = motion_energy(frames)
    # transition k spans frames k and k + 1
    times = np.arange(len(energy)) / fps
    near = [policy.nearmiss_window.contains(t) for t in times]
    safe = [policy.safe_window.contains(t) for t in times]
    near_energy = energy[np.asarray(near, dtype=bool)]
    safe_energy = energy[np.asarray(safe, dtype=bool)]
    if not len(near_energy) or not len(safe_energy):
        return 0.0
    return float(near_energy.mean() - safe_energy.mean())


def detector_auc(
    positive_scores: Sequence[float], negative_scores: Sequence[float]
) -> float:
    """Area under the ROC curve from the Mann-Whitney U statistic."""
    if not positive_scores or not negative_scores:
        msg = "AUC needs at least one positive and one negative score"
        raise ValueError(msg)
    result = stats.mannwhitneyu(
        positive_scores, negative_scores, alternative="two-sided"
    )
    return float(result.statistic) / (
        len(positive_scores) * len(negative_scores)
    )


def corpus_detector_auc(
    clips: Sequence[ClipRecord], policy: SegmentationPolicy = DEFAULT_POLICY
) -> float:
    """Detector AUC over a corpus; event clips are the positives."""
    positives: list[float] = []
    negatives: list[float] = []
    for clip in clips:
        frames = decoder_for(clip).read(clip, range(clip.n_frames))
        score = detector_score(frames, clip.fps, policy)
        (positives if clip.has_event else negatives).append(score)
    return detector_auc(positives, negatives)
