"""Training-curve figures (top-1 error and loss against iteration)."""

from pathlib import Path

import matplotlib as mpl

mpl.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from nearmiss.core.logger import get_logger  # noqa: E402
from nearmiss.train.curve import (  # noqa: E402
    CurveError,
    TrainingCurve,
    smooth_curve,
)

logger = get_logger(__name__)

PLOTTED_SERIES = ("top1_error", "loss")
_TITLES = {"top1_error": "Top-1 error", "loss": "Loss"}


def plot_series(
    curve: TrainingCurve, name: str, out_path: Path, *, window: int = 9
) -> Path:
    """Draw one raw-plus-smoothed series with validation markers.

    Raises:
        CurveError: If the curve is empty or the window is invalid

    """
    if not curve.points:
        msg = "cannot plot an empty training curve"
        raise CurveError(msg)
    raw = curve.series(name)
    smoothed = smooth_curve(raw, window)
    iterations = [p.iteration for p in curve.points]

    fig, ax = plt.subplots(figsize=(7, 4))
    try:
        ax.plot(iterations, raw, color="tab:blue", alpha=0.3, label="raw")
        ax.plot(
            iterations,
            smoothed,
            color="tab:blue",
            label=f"smoothed (window {window})",
        )
        if curve.validation:
            last_iter: dict[int, int] = {}
            for point in curve.points:
                last_iter[point.epoch] = point.iteration
            xs = [last_iter[v.epoch] for v in curve.validation]
            ys = [getattr(v, name) for v in curve.validation]
            ax.plot(xs, ys, "o-", color="tab:orange", label="validation")
        ax.set_xlabel("iteration")
        ax.set_ylabel(_TITLES.get(name, name))
        ax.set_title(f"{_TITLES.get(name, name)} during training")
        ax.grid(visible=True, alpha=0.3)
        ax.legend()
        out_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out_path, dpi=120, bbox_inches="tight")
    finally:
        plt.close(fig)
    logger.info("Wrote %s", out_path)
    return out_path


def plot_curves(
    curve: TrainingCurve, out_dir: Path, *, window: int = 9
) -> list[Path]:
    """Write ``top1_error.png`` and ``loss.png`` into ``out_dir``."""
    return [
        plot_series(curve, name, out_dir / f"{name}.png", window=window)
        for name in PLOTTED_SERIES
    ]
