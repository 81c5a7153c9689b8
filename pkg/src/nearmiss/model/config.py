"""Architecture hyperparameters of the SlowFast network.

``alpha`` is the fast/slow frame-rate ratio and ``beta_inv`` the
slow/fast channel ratio: the fast pathway sees ``alpha`` times more frames
through ``beta_inv`` times fewer channels.
"""

from dataclasses import asdict, dataclass, field
from enum import StrEnum
from typing import Any, Self

from nearmiss.core.errors import NearMissError

# Residual blocks per stage (res2..res5) for each backbone depth.
STAGE_DEPTH: dict[int, tuple[int, int, int, int]] = {
    18: (2, 2, 2, 2),
    50: (3, 4, 6, 3),
    101: (3, 4, 23, 3),
}
# Stage output width as a multiple of ``base_width``.
STAGE_SCALE: dict[int, tuple[int, int, int, int]] = {
    18: (1, 2, 4, 8),
    50: (4, 8, 16, 32),
    101: (4, 8, 16, 32),
}
# Bottleneck inner width as a multiple of ``base_width``.
INNER_SCALE = (1, 2, 4, 8)
STAGE_NAMES = ("res2", "res3", "res4", "res5")
# Lateral connection feeding each stage, in stage order.
FUSE_NAMES = ("fuse_stem", "fuse_res2", "fuse_res3", "fuse_res4")
# Temporal kernel of (stem, res2, res3, res4, res5) per pathway.
TEMPORAL_KERNELS = {
    "slow": (1, 1, 1, 3, 3),
    "fast": (5, 3, 3, 3, 3),
}
# Leading blocks of each stage that use the temporal kernel; the rest
# are purely spatial.
TEMPORAL_KERNEL_BLOCKS = (3, 4, 6, 3)


class ModelConfigError(NearMissError):
    """Raised for an architecture configuration that cannot be built."""


class Pathway(StrEnum):
    """The two network pathways."""

    SLOW = "slow"
    FAST = "fast"

    @property
    def index(self) -> int:
        """Position of the pathway in the network's input list."""
        return 0 if self is Pathway.SLOW else 1


@dataclass(frozen=True)
class StageWidths:
    """Channel widths of one residual stage for one pathway."""

    name: str
    dim_out: int
    dim_inner: int
    blocks: int


@dataclass(frozen=True)
class PathwayConfig:
    """Hyperparameters fixing the network's shape inventory."""

    alpha: int = 4
    beta_inv: int = 8
    slow_frames: int = 2
    backbone_depth: int = 101
    base_width: int = 64
    nonlocal_stages: frozenset[str] = field(
        default_factory=lambda: frozenset({"slow.res4"})
    )
    num_classes: int = 2
    dropout_rate: float = 0.5
    fusion_kernel: int = 5
    fusion_channel_ratio: int = 2

    def __post_init__(self) -> None:
        """Validate; see :meth:`problems`."""
        problems = self.problems()
        if problems:
            raise ModelConfigError("; ".join(problems))

    def problems(self) -> list[str]:
        """Every violated invariant, as human-readable messages."""
        problems: list[str] = []
        for name in ("alpha", "beta_inv", "slow_frames", "base_width"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        if self.backbone_depth not in STAGE_DEPTH:
            problems.append(
                f"backbone_depth must be one of {sorted(STAGE_DEPTH)}, "
                f"got {self.backbone_depth}"
            )
        if self.num_classes < 2:  # noqa: PLR2004
            problems.append("num_classes must be >= 2")
        if not 0.0 <= self.dropout_rate < 1.0:
            problems.append("dropout_rate must be in [0, 1)")
        if self.fusion_kernel < 1 or self.fusion_kernel % 2 == 0:
            problems.append("fusion_kernel must be a positive odd integer")
        if self.fusion_channel_ratio < 1:
            problems.append("fusion_channel_ratio must be >= 1")
        problems.extend(
            f"nonlocal stage {name!r} unknown (expected e.g. 'slow.res4')"
            for name in sorted(self.nonlocal_stages)
            if not _is_stage_name(name)
        )
        if problems:
            return problems
        if self.base_width % self.beta_inv:
            problems.append(
                f"stem: base_width {self.base_width} not divisible by "
                f"beta_inv {self.beta_inv}"
            )
        for stage in self.stages(Pathway.SLOW):
            for width in (stage.dim_out, stage.dim_inner):
                if width % self.beta_inv:
                    problems.append(
                        f"{stage.name}: slow width {width} not divisible "
                        f"by beta_inv {self.beta_inv}"
                    )
                    break
        return problems

    @property
    def fast_frames(self) -> int:
        """Frames seen by the fast pathway."""
        return self.alpha * self.slow_frames

    def frames(self, pathway: Pathway) -> int:
        """Input frame count of ``pathway``."""
        return self.slow_frames if pathway is Pathway.SLOW else (
            self.fast_frames
        )

    @property
    def bottleneck(self) -> bool:
        """Whether residual blocks are bottlenecks (depth >= 50)."""
        return self.backbone_depth >= 50  # noqa: PLR2004

    def stem_width(self, pathway: Pathway) -> int:
        """Output channels of the pathway's stem."""
        if pathway is Pathway.SLOW:
            return self.base_width
        return self.base_width // self.beta_inv

    def stages(self, pathway: Pathway) -> list[StageWidths]:
        """Per-stage widths of ``pathway`` before lateral fusion."""
        divisor = 1 if pathway is Pathway.SLOW else self.beta_inv
        blocks = STAGE_DEPTH[self.backbone_depth]
        scale = STAGE_SCALE[self.backbone_depth]
        inner = INNER_SCALE if self.bottleneck else scale
        return [
            StageWidths(
                name=name,
                dim_out=self.base_width * scale[i] // divisor,
                dim_inner=self.base_width * inner[i] // divisor,
                blocks=blocks[i],
            )
            for i, name in enumerate(STAGE_NAMES)
        ]

    def fusion_width(self, fast_width: int) -> int:
        """Channels a lateral connection adds to the slow pathway."""
        return fast_width * self.fusion_channel_ratio

    def has_nonlocal(self, pathway: Pathway, stage: str) -> bool:
        """Whether a non-local block follows ``stage`` in ``pathway``."""
        return f"{pathway.value}.{stage}" in self.nonlocal_stages

    def to_dict(self) -> dict[str, Any]:
        """Serialize for checkpoints and config echoes."""
        data = asdict(self)
        data["nonlocal_stages"] = sorted(self.nonlocal_stages)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        """Deserialize from :meth:`to_dict` output."""
        values = dict(data)
        if "nonlocal_stages" in values:
            values["nonlocal_stages"] = frozenset(values["nonlocal_stages"])
        try:
            return cls(**values)
        except TypeError as exc:
            msg = f"invalid model config: {exc}"
            raise ModelConfigError(msg) from exc


def _is_stage_name(name: str) -> bool:
    pathway, _, stage = name.partition(".")
    return pathway in {p.value for p in Pathway} and stage in STAGE_NAMES
