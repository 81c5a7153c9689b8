"""Process-wide seeding helpers."""

import random

import numpy as np
import torch

from nearmiss.core.logger import get_logger

logger = get_logger(__name__)


def seed_everything(seed: int) -> None:
    """Seed Python, NumPy and torch and request deterministic kernels.

    Args:
        seed: Seed applied to every generator.

    """
    random.seed(seed)
    np.random.seed(seed % (2**32))  # noqa: NPY002
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(mode=True, warn_only=True)
    logger.debug("Seeded all generators with %d", seed)


def item_rng(*keys: int) -> np.random.Generator:
    """Return a generator keyed by a tuple of integers.

    Randomness for one item (clip, segment, epoch) never depends on the
    order in which workers reach it.
    """
    return np.random.default_rng([abs(int(k)) for k in keys])
