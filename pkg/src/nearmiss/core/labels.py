"""Class labels shared by the data, model, metrics and explain stages."""

from enum import StrEnum
from typing import Self


class Label(StrEnum):
    """Segment classes. ``NEAR_MISS`` is the positive class."""

    SAFE_DRIVING = "safe_driving"
    NEAR_MISS = "near_miss"

    @property
    def index(self) -> int:
        """Column of this class in the model's logits."""
        return CLASS_ORDER.index(self)

    @classmethod
    def from_index(cls, index: int) -> Self:
        """Return the class predicted by logit column ``index``."""
        return cls(CLASS_ORDER[index])


# Logit column order of the 2-class head.
CLASS_ORDER: tuple[Label, ...] = (Label.SAFE_DRIVING, Label.NEAR_MISS)
