"""Confusion counts and the four classification scores.

``near_miss`` is the positive class. Scores are computed exactly with
:class:`fractions.Fraction`::

    accuracy  = (tp + tn) / (tp + fn + fp + tn)
    recall    = tp / (tp + fn)
    precision = tp / (tp + fp)
    f1        = 2 * precision * recall / (precision + recall)

A zero denominator yields a score of 0 and a flag, never NaN. Percentages
are displayed at two decimals, rounding half up.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import StrEnum
from fractions import Fraction
from typing import Any, Self

from nearmiss.core.errors import NearMissError
from nearmiss.core.labels import Label

SCORE_NAMES = ("accuracy", "recall", "precision", "f1")
_CENT = Decimal("0.01")


class MetricsError(NearMissError):
    """Raised for unusable predictions, counts or comparison requests."""


class MetricFlag(StrEnum):
    """Scores whose denominator was zero."""

    UNDEFINED_PRECISION = "undefined_precision"
    UNDEFINED_RECALL = "undefined_recall"
    UNDEFINED_F1 = "undefined_f1"


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts with ``near_miss`` as the positive class."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self) -> None:
        """Reject negative counts."""
        negative = [
            name
            for name in ("tp", "fn", "fp", "tn")
            if getattr(self, name) < 0
        ]
        if negative:
            msg = f"confusion counts must be >= 0: {', '.join(negative)}"
            raise MetricsError(msg)

    @property
    def total(self) -> int:
        """Number of samples counted."""
        return self.tp + self.fn + self.fp + self.tn

    def swapped(self) -> "ConfusionMatrix":
        """Counts with ``safe_driving`` taken as the positive class."""
        return ConfusionMatrix(tp=self.tn, fn=self.fp, fp=self.fn, tn=self.tp)

    def to_dict(self) -> dict[str, int]:
        """Counts by name."""
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        """Inverse of :meth:`to_dict`."""
        return cls(
            tp=int(data["tp"]),
            fn=int(data["fn"]),
            fp=int(data["fp"]),
            tn=int(data["tn"]),
        )


def _as_label(value: Label | str | int, position: int) -> Label:
    try:
        if isinstance(value, Label):
            return value
        if isinstance(value, int):
            return Label.from_index(value)
        return Label(value)
    except (ValueError, IndexError) as exc:
        msg = f"unknown class {value!r} at position {position}"
        raise MetricsError(msg) from exc


def confusion(
    predictions: Sequence[Label | str | int],
    labels: Sequence[Label | str | int],
) -> ConfusionMatrix:
    """Count predictions against labels.

    Classes may be given as :class:`Label`, its string value, or the
    logit column index.

    Raises:
        MetricsError: On a length mismatch, empty input or unknown class

    """
    if len(predictions) != len(labels):
        msg = (
            f"{len(predictions)} predictions but {len(labels)} labels; "
            "lengths must match"
        )
        raise MetricsError(msg)
    if not labels:
        msg = "cannot build a confusion matrix from zero samples"
        raise MetricsError(msg)
    counts = {"tp": 0, "fn": 0, "fp": 0, "tn": 0}
    for i, (pred, truth) in enumerate(zip(predictions, labels, strict=True)):
        pred_pos = _as_label(pred, i) is Label.NEAR_MISS
        truth_pos = _as_label(truth, i) is Label.NEAR_MISS
        if truth_pos:
            counts["tp" if pred_pos else "fn"] += 1
        else:
            counts["fp" if pred_pos else "tn"] += 1
    return ConfusionMatrix(**counts)


@dataclass(frozen=True)
class ExactScores:
    """Scores as exact fractions in ``[0, 1]``."""

    accuracy: Fraction
    recall: Fraction
    precision: Fraction
    f1: Fraction
    flags: frozenset[MetricFlag] = frozenset()


def _ratio(num: int, den: int) -> Fraction | None:
    return Fraction(num, den) if den else None


def exact_scores(cm: ConfusionMatrix) -> ExactScores:
    """Evaluate the four scores in rational arithmetic.

    Raises:
        MetricsError: If the matrix counts no samples

    """
    if cm.total == 0:
        msg = "cannot score an empty confusion matrix"
        raise MetricsError(msg)
    flags: set[MetricFlag] = set()
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    if recall is None:
        flags.add(MetricFlag.UNDEFINED_RECALL)
    if precision is None:
        flags.add(MetricFlag.UNDEFINED_PRECISION)
    f1: Fraction | None = None
    if recall is not None and precision is not None and recall + precision:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        flags.add(MetricFlag.UNDEFINED_F1)
    return ExactScores(
        accuracy=Fraction(cm.tp + cm.tn, cm.total),
        recall=recall or Fraction(0),
        precision=precision or Fraction(0),
        f1=f1 or Fraction(0),
        flags=frozenset(flags),
    )


def to_percent(value: Fraction) -> Decimal:
    """Percentage at two decimals, rounding half up."""
    exact = Decimal(value.numerator * 100) / Decimal(value.denominator)
    return exact.quantize(_CENT, rounding=ROUND_HALF_UP)


def format_percent(value: Decimal | None) -> str:
    """Two-decimal text, ``-`` for a missing value."""
    return "-" if value is None else f"{value:.2f}"


@dataclass(frozen=True)
class MetricsReport:
    """The four scores as percentages plus zero-denominator flags."""

    accuracy: float
    recall: float
    precision: float
    f1: float
    flags: frozenset[MetricFlag] = frozenset()
    confusion: ConfusionMatrix | None = field(default=None, compare=False)

    def rounded(self) -> dict[str, Decimal]:
        """Every score at two decimals, half up."""
        if self.confusion is not None:
            exact = exact_scores(self.confusion)
            return {
                name: to_percent(getattr(exact, name)) for name in SCORE_NAMES
            }
        return {
            name: Decimal(repr(getattr(self, name))).quantize(
                _CENT, rounding=ROUND_HALF_UP
            )
            for name in SCORE_NAMES
        }

    def to_dict(self) -> dict[str, Any]:
        """JSON form: exact values, rounded text and flags."""
        rounded = self.rounded()
        data: dict[str, Any] = {
            "scores": {name: getattr(self, name) for name in SCORE_NAMES},
            "display": {
                name: format_percent(rounded[name]) for name in SCORE_NAMES
            },
            "flags": sorted(self.flags),
        }
        if self.confusion is not None:
            data["confusion"] = self.confusion.to_dict()
        return data


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Score ``cm`` and express the results as percentages.

    Raises:
        MetricsError: If the matrix counts no samples

    """
    exact = exact_scores(cm)
    return MetricsReport(
        accuracy=float(exact.accuracy * 100),
        recall=float(exact.recall * 100),
        precision=float(exact.precision * 100),
        f1=float(exact.f1 * 100),
        flags=exact.flags,
        confusion=cm,
    )
