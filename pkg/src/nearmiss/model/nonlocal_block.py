"""Embedded-Gaussian non-local block.

Every spatiotemporal position attends to every other one::

    y   = softmax(theta(x)^T phi(x) / sqrt(d)) g(x)
    out = x + W_z(y)

``W_z`` starts at zero, so a freshly built block is the identity.
"""

import torch
import torch.nn.functional as F
from torch import nn


class NonLocalBlock(nn.Module):
    """Self-attention over all ``T*H*W`` positions with a residual path."""

    def __init__(self, dim: int, dim_inner: int | None = None) -> None:
        """Build the projections; ``dim_inner`` defaults to ``dim // 2``."""
        super().__init__()
        self.dim_inner = dim_inner or max(dim // 2, 1)
        self.theta = nn.Conv3d(dim, self.dim_inner, kernel_size=1)
        self.phi = nn.Conv3d(dim, self.dim_inner, kernel_size=1)
        self.g = nn.Conv3d(dim, self.dim_inner, kernel_size=1)
        self.out = nn.Conv3d(self.dim_inner, dim, kernel_size=1)
        self.reset_parameters()

    def reset_parameters(self) -> None:
        """Small Gaussian projections; zero output projection."""
        for conv in (self.theta, self.phi, self.g):
            nn.init.normal_(conv.weight, std=0.01)
            nn.init.zeros_(conv.bias)
        nn.init.zeros_(self.out.weight)
        nn.init.zeros_(self.out.bias)

    def attend(self, x: torch.Tensor) -> torch.Tensor:
        """Attention output ``(B, d, T, H, W)`` before the projection."""
        b, _, t, h, w = x.shape
        theta = self.theta(x).reshape(b, self.dim_inner, -1)
        phi = self.phi(x).reshape(b, self.dim_inner, -1)
        g = self.g(x).reshape(b, self.dim_inner, -1)
        # (B, N, N); row i holds the weights position i gives every position
        affinity = torch.bmm(theta.transpose(1, 2), phi)
        weights = F.softmax(affinity * self.dim_inner**-0.5, dim=-1)
        y = torch.bmm(g, weights.transpose(1, 2))
        return y.reshape(b, self.dim_inner, t, h, w)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """``x + W_z(attend(x))``; same shape as ``x``."""
        return x + self.out(self.attend(x))
