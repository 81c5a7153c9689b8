"""SlowFast network: two pathways, lateral fusion, non-local, 2-class head.

Submodule names are stable and used by Grad-CAM layer selection and FLOP
attribution: ``slow_stem``/``fast_stem``, ``slow_res2`` .. ``slow_res5``,
``fast_res2`` .. ``fast_res5`` (blocks ``res0``, ``res1``, ... inside),
``fuse_stem``, ``fuse_res2`` .. ``fuse_res4`` and ``head``.
"""

from collections.abc import Callable

import torch
from torch import nn
from torch.utils.hooks import RemovableHandle

from nearmiss.core.errors import NearMissError
from nearmiss.core.logger import get_logger
from nearmiss.model.blocks import (
    BasicTransform,
    BottleneckTransform,
    PathwayStage,
    Stem,
)
from nearmiss.model.config import (
    FUSE_NAMES,
    STAGE_NAMES,
    TEMPORAL_KERNEL_BLOCKS,
    TEMPORAL_KERNELS,
    Pathway,
    PathwayConfig,
)
from nearmiss.model.flops import pathway_flops
from nearmiss.model.fusion import FuseFastToSlow, ModelInputError
from nearmiss.model.nonlocal_block import NonLocalBlock

logger = get_logger(__name__)

_RGB = 3


class NonFiniteActivationError(NearMissError):
    """Raised when a layer produces NaN or infinite activations."""

    def __init__(self, layer: str) -> None:
        """Name the offending layer."""
        self.layer = layer
        super().__init__(f"non-finite activation in layer '{layer}'")


class Head(nn.Module):
    """Global average pool per pathway, concatenate, dropout, linear."""

    def __init__(
        self, dim_slow: int, dim_fast: int, num_classes: int, dropout: float
    ) -> None:
        """Build the classifier head."""
        super().__init__()
        self.dim_slow = dim_slow
        self.dim_fast = dim_fast
        self.pool = nn.AdaptiveAvgPool3d(1)
        self.dropout = nn.Dropout(dropout)
        self.projection = nn.Linear(dim_slow + dim_fast, num_classes)

    def forward(self, slow: torch.Tensor, fast: torch.Tensor) -> torch.Tensor:
        """Class scores ``(B, num_classes)``."""
        pooled = torch.cat(
            [self.pool(slow).flatten(1), self.pool(fast).flatten(1)], dim=1
        )
        return self.projection(self.dropout(pooled))


class SlowFast(nn.Module):
    """The dual-pathway classifier; its parameters are a function of ``cfg``.

    ``ablate_fast`` zeroes the fast input, leaving a slow-only model with
    the same parameter inventory.
    """

    def __init__(self, cfg: PathwayConfig) -> None:
        """Build every layer from ``cfg`` (PyTorch default init)."""
        super().__init__()
        self.cfg = cfg
        self.ablate_fast = False
        slow_kernels = TEMPORAL_KERNELS[Pathway.SLOW.value]
        fast_kernels = TEMPORAL_KERNELS[Pathway.FAST.value]
        slow_in = cfg.stem_width(Pathway.SLOW)
        fast_in = cfg.stem_width(Pathway.FAST)
        self.slow_stem = Stem(_RGB, slow_in, slow_kernels[0])
        self.fast_stem = Stem(_RGB, fast_in, fast_kernels[0])

        stages = zip(
            cfg.stages(Pathway.SLOW), cfg.stages(Pathway.FAST), strict=True
        )
        for i, (slow, fast) in enumerate(stages):
            fuse = FuseFastToSlow(
                fast_in, cfg.fusion_channel_ratio, cfg.fusion_kernel, cfg.alpha
            )
            self.add_module(FUSE_NAMES[i], fuse)
            stride = 1 if i == 0 else 2
            for pathway, widths, dim_in, kernels in (
                (
                    Pathway.SLOW,
                    slow,
                    slow_in + fuse.out_channels,
                    slow_kernels,
                ),
                (Pathway.FAST, fast, fast_in, fast_kernels),
            ):
                self.add_module(
                    f"{pathway.value}_{widths.name}",
                    PathwayStage(
                        dim_in,
                        widths.dim_out,
                        widths.dim_inner,
                        widths.blocks,
                        stride,
                        kernels[i + 1],
                        TEMPORAL_KERNEL_BLOCKS[i],
                        bottleneck=cfg.bottleneck,
                        nonlocal_block=cfg.has_nonlocal(pathway, widths.name),
                    ),
                )
            slow_in, fast_in = slow.dim_out, fast.dim_out
        self.head = Head(slow_in, fast_in, cfg.num_classes, cfg.dropout_rate)

    def check_inputs(self, slow: torch.Tensor, fast: torch.Tensor) -> None:
        """Validate input shapes against the config.

        Raises:
            ModelInputError: On a rank, channel, frame-count, batch or
                spatial mismatch

        """
        problems: list[str] = []
        for name, x, frames in (
            ("slow", slow, self.cfg.slow_frames),
            ("fast", fast, self.cfg.fast_frames),
        ):
            if x.dim() != 5:  # noqa: PLR2004
                problems.append(
                    f"{name} input must be (B, C, T, H, W), "
                    f"got {tuple(x.shape)}"
                )
                continue
            if x.shape[1] != _RGB:
                problems.append(f"{name} input has {x.shape[1]} channels")
            if x.shape[2] != frames:
                problems.append(
                    f"{name} input has {x.shape[2]} frames, "
                    f"config expects {frames}"
                )
        if not problems and (
            slow.shape[0] != fast.shape[0] or slow.shape[3:] != fast.shape[3:]
        ):
            problems.append(
                f"slow {tuple(slow.shape)} and fast {tuple(fast.shape)} "
                "disagree on batch or spatial size"
            )
        if problems:
            raise ModelInputError("; ".join(problems))

    def forward(self, slow: torch.Tensor, fast: torch.Tensor) -> torch.Tensor:
        """Logits ``(B, num_classes)`` for a batch of frame pairs."""
        self.check_inputs(slow, fast)
        if self.ablate_fast:
            fast = torch.zeros_like(fast)
        slow = self.slow_stem(slow)
        fast = self.fast_stem(fast)
        for fuse_name, stage in zip(FUSE_NAMES, STAGE_NAMES, strict=True):
            slow = getattr(self, fuse_name)(slow, fast)
            slow = getattr(self, f"slow_{stage}")(slow)
            fast = getattr(self, f"fast_{stage}")(fast)
        return self.head(slow, fast)

    def stage(self, pathway: Pathway, name: str) -> PathwayStage:
        """Residual stage ``name`` of ``pathway``."""
        module = getattr(self, f"{pathway.value}_{name}")
        if not isinstance(module, PathwayStage):
            msg = f"no stage {name!r} in the {pathway.value} pathway"
            raise TypeError(msg)
        return module


def init_weights(model: nn.Module) -> None:
    """Fan-out Kaiming convs, zero final residual norms, zero ``W_z``."""
    for module in model.modules():
        if isinstance(module, nn.Conv3d):
            nn.init.kaiming_normal_(
                module.weight, mode="fan_out", nonlinearity="relu"
            )
            if module.bias is not None:
                nn.init.zeros_(module.bias)
        elif isinstance(module, nn.BatchNorm3d):
            nn.init.ones_(module.weight)
            nn.init.zeros_(module.bias)
        elif isinstance(module, nn.Linear):
            nn.init.normal_(module.weight, std=0.01)
            nn.init.zeros_(module.bias)
    for module in model.modules():
        if isinstance(module, (BasicTransform, BottleneckTransform)):
            nn.init.zeros_(module.final_bn.weight)
        elif isinstance(module, NonLocalBlock):
            module.reset_parameters()


def _finite_check(
    name: str,
) -> Callable[[nn.Module, object, torch.Tensor], None]:
    def hook(
        _module: nn.Module, _inputs: object, output: torch.Tensor
    ) -> None:
        if not bool(torch.isfinite(output).all()):
            raise NonFiniteActivationError(name)

    return hook


def install_finite_guard(model: nn.Module) -> list[RemovableHandle]:
    """Make every leaf layer raise on NaN/inf output.

    Returns:
        Hook handles; call ``remove()`` on them to uninstall

    """
    handles = []
    for name, module in model.named_modules():
        if name and not any(True for _ in module.children()):
            handles.append(module.register_forward_hook(_finite_check(name)))
    return handles


def build_slowfast(
    cfg: PathwayConfig,
    init_seed: int = 0,
    *,
    guard: bool = True,
    input_size: int | None = None,
) -> SlowFast:
    """Build and initialize a SlowFast network deterministically.

    The global torch RNG is left untouched: initialization runs on a
    forked generator seeded with ``init_seed``.

    Args:
        cfg: Validated architecture config
        init_seed: Initialization seed
        guard: Install the non-finite activation guard
        input_size: When given, log the per-pathway FLOP estimate for
            square inputs of this size

    Returns:
        The network in train mode

    """
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(init_seed)
        model = SlowFast(cfg)
        init_weights(model)
    if guard:
        install_finite_guard(model)
    n_params = sum(p.numel() for p in model.parameters())
    logger.info(
        "Built SlowFast-%d (alpha=%d, beta_inv=%d, %d+%d frames): "
        "%.2fM parameters",
        cfg.backbone_depth,
        cfg.alpha,
        cfg.beta_inv,
        cfg.slow_frames,
        cfg.fast_frames,
        n_params / 1e6,
    )
    if input_size is not None:
        share = pathway_flops(model, input_size)
        logger.info(
            "FLOPs at %dpx: slow %.2f GMAC, fast %.2f GMAC (%.1f%% fast)",
            input_size,
            share.slow / 1e9,
            share.fast / 1e9,
            100 * share.fast_share,
        )
    return model.train()


def shape_inventory(model: nn.Module) -> dict[str, tuple[int, ...]]:
    """Parameter and buffer shapes by name."""
    shapes = {n: tuple(p.shape) for n, p in model.named_parameters()}
    shapes.update({n: tuple(b.shape) for n, b in model.named_buffers()})
    return shapes
