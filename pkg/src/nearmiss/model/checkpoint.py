"""Versioned checkpoint container shared by training and evaluation."""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import torch

from nearmiss.core.errors import NearMissError
from nearmiss.core.logger import get_logger
from nearmiss.model.config import PathwayConfig
from nearmiss.model.slowfast import SlowFast, build_slowfast

logger = get_logger(__name__)

FORMAT_VERSION = 1


class CheckpointError(NearMissError):
    """Raised when a checkpoint cannot be written, read or applied."""


@dataclass
class Checkpoint:
    """Everything needed to restore a model and explain where it came from.

    Attributes:
        config: Architecture the weights belong to
        state_dict: Parameter and buffer tensors by name
        epoch: Last completed training epoch (0-based)
        rng_state: torch CPU generator state at save time
        normalization: Channel statistics the model was trained with
        metrics: Validation metrics at save time
        ablate_fast: Whether the model was trained slow-only

    """

    config: PathwayConfig
    state_dict: dict[str, torch.Tensor]
    epoch: int = 0
    rng_state: torch.Tensor | None = None
    normalization: dict[str, list[float]] = field(default_factory=dict)
    metrics: dict[str, float] = field(default_factory=dict)
    ablate_fast: bool = False

    @classmethod
    def of(
        cls,
        model: SlowFast,
        epoch: int = 0,
        normalization: dict[str, list[float]] | None = None,
        metrics: dict[str, float] | None = None,
    ) -> "Checkpoint":
        """Snapshot ``model`` (tensors are cloned to CPU)."""
        return cls(
            config=model.cfg,
            state_dict={
                k: v.detach().cpu().clone()
                for k, v in model.state_dict().items()
            },
            epoch=epoch,
            rng_state=torch.get_rng_state(),
            normalization=dict(normalization or {}),
            metrics=dict(metrics or {}),
            ablate_fast=model.ablate_fast,
        )

    def to_payload(self) -> dict[str, Any]:
        """Container written by :func:`save_checkpoint`."""
        return {
            "format_version": FORMAT_VERSION,
            "config": self.config.to_dict(),
            "state_dict": self.state_dict,
            "epoch": self.epoch,
            "rng_state": {"torch": self.rng_state},
            "normalization": self.normalization,
            "metrics": self.metrics,
            "ablate_fast": self.ablate_fast,
        }


def save_checkpoint(path: Path, checkpoint: Checkpoint) -> None:
    """Write ``checkpoint`` atomically (temp file, then rename).

    Raises:
        CheckpointError: If the write fails (e.g. disk full); the previous
            file at ``path``, if any, is left intact

    """
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(checkpoint.to_payload(), tmp)
        os.replace(tmp, path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        msg = (
            f"failed to write checkpoint {path} at epoch {checkpoint.epoch}: "
            f"{exc}; training state after the last saved checkpoint is lost"
        )
        raise CheckpointError(msg) from exc
    logger.debug("Saved checkpoint %s (epoch %d)", path, checkpoint.epoch)


def _config_diff(expected: PathwayConfig, stored: PathwayConfig) -> list[str]:
    want, have = expected.to_dict(), stored.to_dict()
    return [
        f"{key}: expected {want[key]!r}, checkpoint has {have.get(key)!r}"
        for key in want
        if want[key] != have.get(key)
    ]


def load_checkpoint(
    path: Path, expected: PathwayConfig | None = None
) -> Checkpoint:
    """Read a checkpoint and verify it against ``expected``.

    Raises:
        CheckpointError: If the file is unreadable, from another format
            version, or built for a different config

    """
    if not path.exists():
        msg = f"checkpoint not found: {path}"
        raise CheckpointError(msg)
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except (OSError, RuntimeError, EOFError) as exc:
        msg = f"cannot read checkpoint {path}: {exc}"
        raise CheckpointError(msg) from exc
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        msg = (
            f"checkpoint {path} has format version {version}, "
            f"expected {FORMAT_VERSION}"
        )
        raise CheckpointError(msg)
    stored = PathwayConfig.from_dict(payload["config"])
    if expected is not None:
        diff = _config_diff(expected, stored)
        if diff:
            msg = f"checkpoint {path} config mismatch: " + "; ".join(diff)
            raise CheckpointError(msg)
    return Checkpoint(
        config=stored,
        state_dict=payload["state_dict"],
        epoch=int(payload["epoch"]),
        rng_state=payload["rng_state"].get("torch"),
        normalization=payload.get("normalization", {}),
        metrics=payload.get("metrics", {}),
        ablate_fast=bool(payload.get("ablate_fast", False)),
    )


def restore_model(checkpoint: Checkpoint) -> SlowFast:
    """Build a model from a checkpoint, in eval mode."""
    model = build_slowfast(checkpoint.config)
    try:
        model.load_state_dict(checkpoint.state_dict, strict=True)
    except RuntimeError as exc:
        msg = f"checkpoint weights do not fit the model: {exc}"
        raise CheckpointError(msg) from exc
    model.ablate_fast = checkpoint.ablate_fast
    return model.eval()
