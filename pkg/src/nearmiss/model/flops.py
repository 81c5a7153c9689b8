"""Analytic multiply-accumulate counts per layer and per pathway.

Counts come from a single shape-tracing forward pass with hooks on every
convolution, linear layer and non-local attention. Only multiply-accumulates
are counted; norms, activations and pooling are ignored.

Attribution to the fast pathway covers the fast layers, the lateral
convolutions, and the share of each slow convolution that reads fused
(fast-derived) input channels.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import torch
from torch import nn

from nearmiss.model.config import FUSE_NAMES, STAGE_NAMES
from nearmiss.model.nonlocal_block import NonLocalBlock

if TYPE_CHECKING:
    from nearmiss.model.slowfast import SlowFast


@dataclass(frozen=True)
class LayerFlops:
    """One row of the FLOP table."""

    name: str
    kind: str
    input_shape: tuple[int, ...]
    output_shape: tuple[int, ...]
    params: int
    macs: int
    fast_fraction: float

    @property
    def pathway(self) -> str:
        """Pathway the layer belongs to (``mixed`` for fused inputs)."""
        if self.fast_fraction == 1.0:
            return "fast"
        if self.fast_fraction == 0.0:
            return "slow"
        return "mixed"

    def to_dict(self) -> dict[str, Any]:
        """Serialize for the model summary."""
        return {
            "name": self.name,
            "kind": self.kind,
            "input_shape": list(self.input_shape),
            "output_shape": list(self.output_shape),
            "params": self.params,
            "macs": self.macs,
            "pathway": self.pathway,
            "fast_fraction": round(self.fast_fraction, 6),
        }


@dataclass(frozen=True)
class PathwayFlops:
    """Multiply-accumulates attributed to each pathway."""

    slow: float
    fast: float

    @property
    def total(self) -> float:
        """All counted multiply-accumulates."""
        return self.slow + self.fast

    @property
    def fast_share(self) -> float:
        """Fraction of the total attributed to the fast pathway."""
        return self.fast / self.total if self.total else 0.0


def _fast_fractions(model: "SlowFast") -> dict[str, float]:
    """Fast share of layers that mix pathways."""
    fractions: dict[str, float] = {}
    for fuse_name, stage in zip(FUSE_NAMES, STAGE_NAMES, strict=True):
        fused = getattr(model, fuse_name).out_channels
        first = getattr(model, f"slow_{stage}").res0
        for suffix, conv in (
            ("branch1", first.branch1),
            ("branch2.a", first.branch2.a),
        ):
            if conv is not None:
                fractions[f"slow_{stage}.res0.{suffix}"] = (
                    fused / conv.in_channels
                )
    head = model.head
    fractions["head.projection"] = head.dim_fast / (
        head.dim_slow + head.dim_fast
    )
    return fractions


def _macs(module: nn.Module, x: torch.Tensor, out: torch.Tensor) -> int:
    if isinstance(module, nn.Conv3d):
        per_output = (module.in_channels // module.groups) * math.prod(
            module.kernel_size
        )
        return out[0].numel() * per_output
    if isinstance(module, nn.Linear):
        return module.in_features * module.out_features
    if isinstance(module, NonLocalBlock):
        positions = math.prod(x.shape[2:])
        # affinity (N x N x d) plus weighted sum (N x N x d)
        return 2 * positions * positions * module.dim_inner
    return 0


def flop_table(model: "SlowFast", input_size: int) -> list[LayerFlops]:
    """Per-layer multiply-accumulates for one square input of ``input_size``.

    The model runs once in eval mode on zeros; its mode is restored.
    """
    cfg = model.cfg
    device = next(model.parameters()).device
    slow = torch.zeros(
        1, 3, cfg.slow_frames, input_size, input_size, device=device
    )
    fast = torch.zeros(
        1, 3, cfg.fast_frames, input_size, input_size, device=device
    )
    fractions = _fast_fractions(model)
    rows: list[LayerFlops] = []

    def record(name: str) -> Callable[..., None]:
        def hook(
            module: nn.Module,
            inputs: tuple[torch.Tensor, ...],
            out: torch.Tensor,
        ) -> None:
            x = inputs[0]
            if name.startswith(("fast_", "fuse_")):
                fraction = 1.0
            else:
                fraction = fractions.get(name, 0.0)
            rows.append(
                LayerFlops(
                    name=name,
                    kind=type(module).__name__,
                    input_shape=tuple(x.shape[1:]),
                    output_shape=tuple(out.shape[1:]),
                    params=sum(
                        p.numel() for p in module.parameters(recurse=False)
                    ),
                    macs=_macs(module, x, out),
                    fast_fraction=fraction,
                )
            )

        return hook

    handles = [
        module.register_forward_hook(record(name))
        for name, module in model.named_modules()
        if isinstance(module, (nn.Conv3d, nn.Linear, NonLocalBlock))
    ]
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            model(slow, fast)
    finally:
        for handle in handles:
            handle.remove()
        model.train(was_training)
    return rows


def pathway_flops(model: "SlowFast", input_size: int) -> PathwayFlops:
    """Sum :func:`flop_table` per pathway."""
    rows = flop_table(model, input_size)
    fast = sum(row.macs * row.fast_fraction for row in rows)
    slow = sum(row.macs * (1.0 - row.fast_fraction) for row in rows)
    return PathwayFlops(slow=slow, fast=fast)


def model_summary(model: "SlowFast", input_size: int) -> dict[str, Any]:
    """Per-layer shape and FLOP table plus pathway totals."""
    rows = flop_table(model, input_size)
    fast = sum(row.macs * row.fast_fraction for row in rows)
    total = sum(row.macs for row in rows)
    return {
        "config": model.cfg.to_dict(),
        "input_size": input_size,
        "parameters": sum(p.numel() for p in model.parameters()),
        "totals": {
            "macs": total,
            "slow_macs": total - fast,
            "fast_macs": fast,
            "fast_share": fast / total if total else 0.0,
        },
        "layers": [row.to_dict() for row in rows],
    }
