"""Training curves: per-iteration rows, per-epoch validation, smoothing."""

from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Self

import numpy as np

from nearmiss.core.errors import NearMissError
from nearmiss.core.records import read_jsonl, write_jsonl


class CurveError(NearMissError):
    """Raised for an invalid smoothing request or curve file."""


@dataclass(frozen=True)
class CurvePoint:
    """One training iteration."""

    iteration: int
    epoch: int
    lr: float
    loss: float
    top1_error: float


@dataclass(frozen=True)
class ValidationPoint:
    """Validation result after one epoch."""

    epoch: int
    lr: float
    loss: float
    accuracy: float

    @property
    def top1_error(self) -> float:
        """``1 - accuracy``."""
        return 1.0 - self.accuracy


@dataclass
class TrainingCurve:
    """Everything a training run measured, in order."""

    points: list[CurvePoint] = field(default_factory=list)
    validation: list[ValidationPoint] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        """Iterations recorded."""
        return len(self.points)

    def series(self, name: str) -> list[float]:
        """Per-iteration values of ``loss``, ``top1_error`` or ``lr``."""
        return [float(getattr(p, name)) for p in self.points]

    def write(self, path: Path, validation_path: Path) -> None:
        """Write both tables as JSONL."""
        write_jsonl(path, (asdict(p) for p in self.points))
        write_jsonl(
            validation_path,
            (
                {**asdict(v), "top1_error": v.top1_error}
                for v in self.validation
            ),
        )

    @classmethod
    def read(cls, path: Path, validation_path: Path | None = None) -> Self:
        """Load a curve written by :meth:`write`."""
        points = [CurvePoint(**row) for row in read_jsonl(path)]
        validation: list[ValidationPoint] = []
        if validation_path is not None and validation_path.exists():
            validation = [
                ValidationPoint(
                    epoch=row["epoch"],
                    lr=row["lr"],
                    loss=row["loss"],
                    accuracy=row["accuracy"],
                )
                for row in read_jsonl(validation_path)
            ]
        return cls(points=points, validation=validation)

    def to_dict(self) -> dict[str, Any]:
        """Both tables as lists of records."""
        return {
            "points": [asdict(p) for p in self.points],
            "validation": [asdict(v) for v in self.validation],
        }


def smooth_curve(series: Sequence[float], window: int) -> list[float]:
    """Centered moving average, truncated at the edges.

    Position ``i`` averages ``series[i - window // 2 : i + window // 2 + 1]``
    clipped to the valid range, so the output has the input's length.

    Raises:
        CurveError: If ``window`` is not a positive odd integer

    """
    if window < 1 or window % 2 == 0:
        msg = f"smoothing window must be a positive odd integer, got {window}"
        raise CurveError(msg)
    values = np.asarray(series, dtype=np.float64)
    half = window // 2
    n = len(values)
    return [
        float(values[max(0, i - half) : min(n, i + half + 1)].mean())
        for i in range(n)
    ]
