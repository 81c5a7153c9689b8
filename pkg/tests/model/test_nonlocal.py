"""Tests for the non-local block and lateral fusion."""

import pytest
import torch
from torch import nn

from nearmiss.model.fusion import FuseFastToSlow, ModelInputError
from nearmiss.model.nonlocal_block import NonLocalBlock


@pytest.fixture
def features() -> torch.Tensor:
    """``(2, 8, 2, 3, 3)`` random features."""
    gen = torch.Generator().manual_seed(0)
    return torch.randn(2, 8, 2, 3, 3, generator=gen)


class TestNonLocalBlock:
    """Test self-attention over positions."""

    def test_fresh_block_is_identity(self, features: torch.Tensor) -> None:
        """Test that the zero output projection leaves x unchanged."""
        block = NonLocalBlock(8)

        assert torch.equal(block(features), features)
        assert block.dim_inner == 4

    def test_uniform_attention_averages(self, features: torch.Tensor) -> None:
        """Test that equal affinities make every position the mean of g."""
        block = NonLocalBlock(8)
        nn.init.zeros_(block.theta.weight)
        nn.init.zeros_(block.phi.weight)

        y = block.attend(features)

        g = block.g(features).flatten(2).mean(dim=2)
        expected = g[:, :, None, None, None].expand_as(y)
        torch.testing.assert_close(y, expected)

    def test_residual_path(self, features: torch.Tensor) -> None:
        """Test that the output adds W_z(y) to the input."""
        block = NonLocalBlock(8)
        nn.init.normal_(block.out.weight)

        out = block(features)

        torch.testing.assert_close(
            out, features + block.out(block.attend(features))
        )
        assert out.shape == features.shape


class TestFuseFastToSlow:
    """Test lateral connections."""

    def test_channels_and_time(self) -> None:
        """Test that 8 fast steps become 2 slow steps with 2x channels."""
        fuse = FuseFastToSlow(
            dim_in=4, channel_ratio=2, fusion_kernel=5, alpha=4
        )
        slow = torch.zeros(1, 16, 2, 5, 5)
        fast = torch.zeros(1, 4, 8, 5, 5)

        out = fuse(slow, fast)

        assert fuse.out_channels == 8
        assert out.shape == (1, 24, 2, 5, 5)

    def test_frame_ratio_mismatch(self) -> None:
        """Test that fast time must be alpha times slow time."""
        fuse = FuseFastToSlow(4, 2, 5, 4)

        with pytest.raises(ModelInputError, match="fast T == 4 x slow T"):
            fuse(torch.zeros(1, 16, 2, 5, 5), torch.zeros(1, 4, 6, 5, 5))
