"""Lateral connections from the fast pathway into the slow pathway."""

import torch
from torch import nn

from nearmiss.core.errors import NearMissError
from nearmiss.model.blocks import BN_EPS, BN_MOMENTUM


class ModelInputError(NearMissError):
    """Raised when tensors fed to the network have the wrong shape."""


class FuseFastToSlow(nn.Module):
    """Time-strided convolution of fast features, concatenated onto slow.

    The convolution has kernel ``fusion_kernel`` in time and stride
    ``alpha``, turning ``alpha * T`` fast steps into ``T`` slow steps and
    ``C_fast`` channels into ``channel_ratio * C_fast``.
    """

    def __init__(
        self,
        dim_in: int,
        channel_ratio: int,
        fusion_kernel: int,
        alpha: int,
    ) -> None:
        """Build the lateral convolution, BN and ReLU."""
        super().__init__()
        self.alpha = alpha
        self.conv_f2s = nn.Conv3d(
            dim_in,
            dim_in * channel_ratio,
            kernel_size=(fusion_kernel, 1, 1),
            stride=(alpha, 1, 1),
            padding=(fusion_kernel // 2, 0, 0),
            bias=False,
        )
        self.bn = nn.BatchNorm3d(
            dim_in * channel_ratio, eps=BN_EPS, momentum=BN_MOMENTUM
        )
        self.relu = nn.ReLU(inplace=True)

    @property
    def out_channels(self) -> int:
        """Channels appended to the slow features."""
        return self.conv_f2s.out_channels

    def forward(self, slow: torch.Tensor, fast: torch.Tensor) -> torch.Tensor:
        """Return slow features with the fused fast channels appended.

        Raises:
            ModelInputError: If fast time is not ``alpha`` x slow time or
                the spatial sizes differ

        """
        if fast.shape[2] != self.alpha * slow.shape[2]:
            msg = (
                f"lateral fusion needs fast T == {self.alpha} x slow T, got "
                f"fast T={fast.shape[2]} and slow T={slow.shape[2]}"
            )
            raise ModelInputError(msg)
        if fast.shape[3:] != slow.shape[3:] or fast.shape[0] != slow.shape[0]:
            msg = (
                f"lateral fusion shape mismatch: slow {tuple(slow.shape)} "
                f"vs fast {tuple(fast.shape)}"
            )
            raise ModelInputError(msg)
        fused = self.relu(self.bn(self.conv_f2s(fast)))
        return torch.cat([slow, fused], dim=1)


def lateral_fuse(
    fast_features: torch.Tensor,
    slow_features: torch.Tensor,
    fuse: FuseFastToSlow,
) -> torch.Tensor:
    """Fuse ``fast_features`` into ``slow_features`` through ``fuse``."""
    return fuse(slow_features, fast_features)
