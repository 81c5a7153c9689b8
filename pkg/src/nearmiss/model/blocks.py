"""Residual building blocks shared by both pathways.

Channel layout is ``(B, C, T, H, W)`` throughout. Temporal kernels only
ever touch the first convolution of a block; spatial downsampling happens
in the 3x3 convolution and in the projection shortcut.
"""

import torch
from torch import nn

from nearmiss.model.nonlocal_block import NonLocalBlock

BN_EPS = 1e-5
BN_MOMENTUM = 0.1


def _bn(channels: int) -> nn.BatchNorm3d:
    return nn.BatchNorm3d(channels, eps=BN_EPS, momentum=BN_MOMENTUM)


class Stem(nn.Module):
    """Tx7x7 convolution, BN, ReLU, then 1x3x3 spatial max pooling."""

    def __init__(
        self, dim_in: int, dim_out: int, temporal_kernel: int
    ) -> None:
        """Build a stem halving resolution twice (conv, then pool)."""
        super().__init__()
        self.conv = nn.Conv3d(
            dim_in,
            dim_out,
            kernel_size=(temporal_kernel, 7, 7),
            stride=(1, 2, 2),
            padding=(temporal_kernel // 2, 3, 3),
            bias=False,
        )
        self.bn = _bn(dim_out)
        self.relu = nn.ReLU(inplace=True)
        self.pool = nn.MaxPool3d(
            kernel_size=(1, 3, 3), stride=(1, 2, 2), padding=(0, 1, 1)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Apply the stem."""
        return self.pool(self.relu(self.bn(self.conv(x))))


class BasicTransform(nn.Module):
    """Residual branch ``Tx3x3, 1x3x3`` used by the 18-layer backbone."""

    def __init__(
        self,
        dim_in: int,
        dim_out: int,
        temporal_kernel: int,
        stride: int,
        dim_inner: int,  # noqa: ARG002
    ) -> None:
        """Build the branch; ``dim_inner`` is unused by basic blocks."""
        super().__init__()
        self.a = nn.Conv3d(
            dim_in,
            dim_out,
            kernel_size=(temporal_kernel, 3, 3),
            stride=(1, stride, stride),
            padding=(temporal_kernel // 2, 1, 1),
            bias=False,
        )
        self.a_bn = _bn(dim_out)
        self.a_relu = nn.ReLU(inplace=True)
        self.b = nn.Conv3d(
            dim_out,
            dim_out,
            kernel_size=(1, 3, 3),
            padding=(0, 1, 1),
            bias=False,
        )
        self.b_bn = _bn(dim_out)

    @property
    def final_bn(self) -> nn.BatchNorm3d:
        """Last norm of the branch (zero-initialized scale)."""
        return self.b_bn

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Apply the branch (no final ReLU; the block adds it)."""
        x = self.a_relu(self.a_bn(self.a(x)))
        return self.b_bn(self.b(x))


class BottleneckTransform(nn.Module):
    """Residual branch ``Tx1x1, 1x3x3, 1x1x1`` for 50/101-layer backbones."""

    def __init__(
        self,
        dim_in: int,
        dim_out: int,
        temporal_kernel: int,
        stride: int,
        dim_inner: int,
    ) -> None:
        """Build the branch; the stride sits on the 3x3 convolution."""
        super().__init__()
        self.a = nn.Conv3d(
            dim_in,
            dim_inner,
            kernel_size=(temporal_kernel, 1, 1),
            padding=(temporal_kernel // 2, 0, 0),
            bias=False,
        )
        self.a_bn = _bn(dim_inner)
        self.a_relu = nn.ReLU(inplace=True)
        self.b = nn.Conv3d(
            dim_inner,
            dim_inner,
            kernel_size=(1, 3, 3),
            stride=(1, stride, stride),
            padding=(0, 1, 1),
            bias=False,
        )
        self.b_bn = _bn(dim_inner)
        self.b_relu = nn.ReLU(inplace=True)
        self.c = nn.Conv3d(dim_inner, dim_out, kernel_size=1, bias=False)
        self.c_bn = _bn(dim_out)

    @property
    def final_bn(self) -> nn.BatchNorm3d:
        """Last norm of the branch (zero-initialized scale)."""
        return self.c_bn

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Apply the branch (no final ReLU; the block adds it)."""
        x = self.a_relu(self.a_bn(self.a(x)))
        x = self.b_relu(self.b_bn(self.b(x)))
        return self.c_bn(self.c(x))


class ResBlock(nn.Module):
    """Residual block with a projection shortcut when the shape changes."""

    def __init__(  # noqa: PLR0913
        self,
        dim_in: int,
        dim_out: int,
        temporal_kernel: int,
        stride: int,
        dim_inner: int,
        *,
        bottleneck: bool,
    ) -> None:
        """Build the block from its branch type and widths."""
        super().__init__()
        if dim_in != dim_out or stride != 1:
            self.branch1: nn.Conv3d | None = nn.Conv3d(
                dim_in,
                dim_out,
                kernel_size=1,
                stride=(1, stride, stride),
                bias=False,
            )
            self.branch1_bn: nn.BatchNorm3d | None = _bn(dim_out)
        else:
            self.branch1 = None
            self.branch1_bn = None
        transform = BottleneckTransform if bottleneck else BasicTransform
        self.branch2 = transform(
            dim_in, dim_out, temporal_kernel, stride, dim_inner
        )
        self.relu = nn.ReLU(inplace=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Residual sum followed by ReLU."""
        residual = self.branch2(x)
        if self.branch1 is not None and self.branch1_bn is not None:
            x = self.branch1_bn(self.branch1(x))
        return self.relu(x + residual)


class PathwayStage(nn.Module):
    """One residual stage of one pathway, optionally ending in a non-local.

    Blocks are named ``res0``, ``res1``, ...; the non-local block, when
    present, is ``nonlocal`` and follows the last residual block.
    """

    def __init__(  # noqa: PLR0913
        self,
        dim_in: int,
        dim_out: int,
        dim_inner: int,
        blocks: int,
        stride: int,
        temporal_kernel: int,
        temporal_blocks: int,
        *,
        bottleneck: bool,
        nonlocal_block: bool = False,
    ) -> None:
        """Stack ``blocks`` residual blocks; only the first one strides."""
        super().__init__()
        self.num_blocks = blocks
        for i in range(blocks):
            kernel = temporal_kernel if i < temporal_blocks else 1
            self.add_module(
                f"res{i}",
                ResBlock(
                    dim_in if i == 0 else dim_out,
                    dim_out,
                    kernel,
                    stride if i == 0 else 1,
                    dim_inner,
                    bottleneck=bottleneck,
                ),
            )
        self.nonlocal_block = (
            NonLocalBlock(dim_out) if nonlocal_block else None
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Run the blocks in order."""
        for i in range(self.num_blocks):
            x = getattr(self, f"res{i}")(x)
        if self.nonlocal_block is not None:
            x = self.nonlocal_block(x)
        return x
