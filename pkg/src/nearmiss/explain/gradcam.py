"""Gradient-weighted class activation maps for one pathway.

For a layer with activations ``A`` of shape ``(K, T', H', W')``::

    w_k = mean over (t, y, x) of d score / d A_k
    cam = ReLU(sum_k w_k * A_k)

Each feature-time slice is upsampled bilinearly to the input resolution,
then repeated (nearest neighbor) onto the pathway's input frames, and the
whole stack is divided by its maximum.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from nearmiss.core.errors import NearMissError
from nearmiss.core.labels import Label
from nearmiss.core.logger import get_logger
from nearmiss.data.augment import CropGeometry
from nearmiss.model.config import Pathway
from nearmiss.model.slowfast import SlowFast
from nearmiss.synth.spec import GroundTruth

logger = get_logger(__name__)

DEFAULT_LAYERS: Mapping[Pathway, str] = {
    Pathway.SLOW: "slow_res5",
    Pathway.FAST: "fast_res5",
}


class ExplainError(NearMissError):
    """Raised for an unusable explanation request."""


@dataclass(frozen=True)
class HeatmapStack:
    """Per-frame heatmaps of one pathway, values in ``[0, 1]``.

    Attributes:
        pathway: Pathway whose layer was explained
        maps: ``(T, H, W)`` float32, one map per pathway input frame
        source_layer: Dotted module name the activations came from
        target_class: Class whose score was differentiated
        all_zero: The raw map was zero everywhere (``maps`` is all zeros)

    """

    pathway: Pathway
    maps: np.ndarray
    source_layer: str
    target_class: Label
    all_zero: bool = False

    def __len__(self) -> int:
        """Number of frames."""
        return int(self.maps.shape[0])

    def peak(self) -> tuple[int, int, int]:
        """``(t, y, x)`` of the stack maximum (first in C order on ties)."""
        t, y, x = np.unravel_index(int(self.maps.argmax()), self.maps.shape)
        return int(t), int(y), int(x)


def resolve_layer(model: nn.Module, name: str) -> nn.Module:
    """Module registered under the dotted ``name``.

    Raises:
        ExplainError: If no such module exists

    """
    modules = dict(model.named_modules())
    if not name or name not in modules:
        top = ", ".join(n for n, _ in model.named_children())
        msg = f"layer {name!r} not found; top-level modules: {top}"
        raise ExplainError(msg)
    return modules[name]


def _batched(x: torch.Tensor) -> torch.Tensor:
    return x.unsqueeze(0) if x.dim() == 4 else x  # noqa: PLR2004


def grad_cam(  # noqa: PLR0913
    model: SlowFast,
    slow: torch.Tensor,
    fast: torch.Tensor,
    target_class: Label = Label.NEAR_MISS,
    layer: str | None = None,
    pathway: Pathway = Pathway.FAST,
) -> HeatmapStack:
    """Grad-CAM of ``layer`` for one normalized frame pair.

    Args:
        model: Network; must be in eval mode
        slow: ``(C, T, H, W)`` or ``(1, C, T, H, W)`` slow input
        fast: Matching fast input
        target_class: Class whose logit is explained
        layer: Dotted module name; defaults to the last stage of
            ``pathway``
        pathway: Pathway whose input frames the maps are aligned to

    Raises:
        ExplainError: If the model is training, the layer is missing or
            the input holds more than one sample

    """
    if model.training:
        msg = "grad_cam needs the model in eval mode"
        raise ExplainError(msg)
    layer_name = layer or DEFAULT_LAYERS[pathway]
    module = resolve_layer(model, layer_name)
    slow, fast = _batched(slow), _batched(fast)
    if slow.shape[0] != 1:
        msg = f"grad_cam explains one sample at a time, got {slow.shape[0]}"
        raise ExplainError(msg)
    device = next(model.parameters()).device
    slow, fast = slow.to(device), fast.to(device)

    captured: dict[str, torch.Tensor] = {}

    def keep_grad(grad: torch.Tensor) -> None:
        captured["grad"] = grad.detach()

    def forward_hook(
        _module: nn.Module, _inputs: object, output: torch.Tensor
    ) -> None:
        captured["activation"] = output.detach()
        output.register_hook(keep_grad)

    handle = module.register_forward_hook(forward_hook)
    try:
        with torch.enable_grad():
            model.zero_grad(set_to_none=True)
            logits = model(slow, fast)
            logits[0, target_class.index].backward()
    finally:
        handle.remove()
        model.zero_grad(set_to_none=True)
    if "grad" not in captured:
        msg = f"layer {layer_name!r} does not influence the class score"
        raise ExplainError(msg)

    activation = captured["activation"][0]
    weights = captured["grad"][0].mean(dim=(1, 2, 3))
    cam = F.relu(torch.einsum("k,kthw->thw", weights, activation))
    frames = (slow if pathway is Pathway.SLOW else fast).shape[2:]
    maps = upsample_cam(cam, tuple(frames))
    peak = float(maps.max())
    all_zero = peak <= 0.0
    if all_zero:
        logger.warning(
            "Grad-CAM of %s for %s is zero everywhere",
            layer_name,
            target_class,
        )
    else:
        maps = maps / peak
    return HeatmapStack(
        pathway=pathway,
        maps=maps.astype(np.float32),
        source_layer=layer_name,
        target_class=target_class,
        all_zero=all_zero,
    )


def upsample_cam(cam: torch.Tensor, size: tuple[int, ...]) -> np.ndarray:
    """``(T', H', W')`` map to ``(T, H, W)``: bilinear space, nearest time."""
    t_out, h_out, w_out = size
    spatial = F.interpolate(
        cam.unsqueeze(1).float(),
        size=(h_out, w_out),
        mode="bilinear",
        align_corners=False,
    )[:, 0]
    t_in = cam.shape[0]
    index = (torch.arange(t_out) * t_in) // t_out
    out = spatial[index].clamp_min(0.0)
    return out.cpu().numpy()


def spatial_entropy(heatmap: np.ndarray) -> float:
    """Shannon entropy (nats) of a map treated as a distribution.

    An all-zero map counts as uniform, the least peaked case.
    """
    values = np.asarray(heatmap, dtype=np.float64).ravel()
    total = values.sum()
    if total <= 0:
        return float(np.log(values.size))
    p = values[values > 0] / total
    return float(-(p * np.log(p)).sum())


def stack_entropy(stack: HeatmapStack) -> float:
    """Mean per-frame spatial entropy of a stack."""
    return float(np.mean([spatial_entropy(m) for m in stack.maps]))


def peak_hits_box(
    stack: HeatmapStack,
    frame_indices: Sequence[int],
    truth: GroundTruth,
    geometry: CropGeometry | None = None,
) -> bool:
    """Whether the stack maximum lies inside the intruder's box.

    Args:
        stack: Heatmaps aligned with ``frame_indices``
        frame_indices: Source clip frame of every map
        truth: Per-frame intruder boxes in source pixels
        geometry: Crop placing the maps in the source frame; identity when
            omitted

    """
    if len(frame_indices) != len(stack):
        msg = (
            f"{len(frame_indices)} frame indices for a stack of "
            f"{len(stack)} maps"
        )
        raise ExplainError(msg)
    if stack.all_zero:
        return False
    t, y, x = stack.peak()
    box = truth.box(frame_indices[t])
    if box is None:
        return False
    sx, sy = (x, y) if geometry is None else geometry.to_source(x, y)
    x0, y0, x1, y1 = box
    return x0 - 0.5 <= sx < x1 - 0.5 and y0 - 0.5 <= sy < y1 - 0.5


def localization_hit_rate(hits: Sequence[bool]) -> float:
    """Fraction of clips whose heatmap peak hit the intruder.

    Raises:
        ExplainError: If there are no clips

    """
    if not hits:
        msg = "localization hit rate needs at least one clip"
        raise ExplainError(msg)
    return sum(hits) / len(hits)
