"""Learning-rate schedule: linear warmup, then one cosine annealing cycle.

For ``epoch < warmup_epochs`` the rate rises linearly from
``warmup_start`` to ``lr_max``. Afterwards::

    lr = lr_min + (lr_max - lr_min) * (1 + cos(pi * T_cur / T_span)) / 2

with ``T_cur = epoch - warmup_epochs`` and ``T_span = t_max -
warmup_epochs``. Both pieces give ``lr_max`` at the junction.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any

from nearmiss.core.errors import NearMissError


class ScheduleError(NearMissError):
    """Raised for an invalid schedule or an out-of-range epoch."""


@dataclass(frozen=True)
class ScheduleConfig:
    """Warmup and cosine-annealing parameters."""

    lr_min: float = 0.0
    lr_max: float = 0.1
    warmup_start: float = 0.01
    warmup_epochs: int = 34
    t_max: int = 196
    per_iteration: bool = False

    def __post_init__(self) -> None:
        """Reject configs breaking the schedule invariants."""
        problems = self.problems()
        if problems:
            raise ScheduleError("; ".join(problems))

    def problems(self) -> list[str]:
        """Every violated invariant."""
        problems = []
        if not 0 <= self.lr_min < self.lr_max:
            problems.append(
                f"need 0 <= lr_min < lr_max, got {self.lr_min}, {self.lr_max}"
            )
        if not 0 < self.warmup_start <= self.lr_max:
            problems.append(
                f"need 0 < warmup_start <= lr_max, got {self.warmup_start}"
            )
        if self.warmup_epochs < 0:
            problems.append("warmup_epochs must be >= 0")
        if not self.warmup_epochs < self.t_max:
            problems.append(
                f"need warmup_epochs < t_max, got {self.warmup_epochs} "
                f">= {self.t_max}"
            )
        return problems

    def to_dict(self) -> dict[str, Any]:
        """Serialize for echoes and run records."""
        return asdict(self)


@dataclass(frozen=True)
class OptimConfig:
    """SGD hyperparameters and the epoch budget."""

    momentum: float = 0.9
    weight_decay: float = 1e-4
    batch_size: int = 8
    max_epochs: int = 196

    def __post_init__(self) -> None:
        """Reject invalid optimizer settings."""
        problems = self.problems()
        if problems:
            raise ScheduleError("; ".join(problems))

    def problems(self) -> list[str]:
        """Every violated invariant."""
        problems = []
        if not 0 <= self.momentum < 1:
            problems.append(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            problems.append("weight_decay must be >= 0")
        if self.batch_size < 1:
            problems.append("batch_size must be >= 1")
        if self.max_epochs < 1:
            problems.append("max_epochs must be >= 1")
        return problems

    def to_dict(self) -> dict[str, Any]:
        """Serialize for echoes and run records."""
        return asdict(self)


def lr_at(epoch: float, cfg: ScheduleConfig) -> float:
    """Learning rate at ``epoch`` (fractional epochs allowed).

    Raises:
        ScheduleError: If ``epoch`` is outside ``[0, t_max]``

    """
    if not 0 <= epoch <= cfg.t_max:
        msg = f"epoch {epoch} outside [0, {cfg.t_max}]"
        raise ScheduleError(msg)
    if epoch < cfg.warmup_epochs:
        progress = epoch / cfg.warmup_epochs
        return cfg.warmup_start + (cfg.lr_max - cfg.warmup_start) * progress
    t_cur = epoch - cfg.warmup_epochs
    t_span = cfg.t_max - cfg.warmup_epochs
    cosine = (1 + math.cos(math.pi * t_cur / t_span)) / 2
    return cfg.lr_min + (cfg.lr_max - cfg.lr_min) * cosine


def epoch_lr(epoch: float, cfg: ScheduleConfig) -> float:
    """``lr_at`` with epochs past ``t_max`` held at ``t_max``."""
    return lr_at(min(epoch, cfg.t_max), cfg)
