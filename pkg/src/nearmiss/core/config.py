"""Run configuration: layered INI files validated into typed settings.

Layers, lowest first: the packaged ``default.ini``, the user's file,
``--set section.key=value`` overrides, then the ``NEARMISS_OUTPUT_DIR``
environment variable for ``io.output_dir``. Lists are comma-separated.
Every problem (unknown section or key, unparsable value, violated
invariant) is collected and reported in one :class:`ConfigValidationError`.
"""

import os
from collections.abc import Callable, Mapping, Sequence
from configparser import ConfigParser, Error as ConfigParserError
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from nearmiss.core.errors import NearMissError
from nearmiss.core.labels import Label
from nearmiss.core.logger import get_logger
from nearmiss.data.segmentation import SegmentationPolicy, Window
from nearmiss.data.splits import ratio_problems
from nearmiss.model.config import Pathway, PathwayConfig
from nearmiss.train.schedule import OptimConfig, ScheduleConfig
from nearmiss.utils.paths import resolve_config_file

logger = get_logger(__name__)

OUTPUT_DIR_ENV = "NEARMISS_OUTPUT_DIR"

Converter = Callable[[str], Any]


class ConfigValidationError(NearMissError):
    """Raised when configuration validation fails."""

    def __init__(self, problems: Sequence[str]) -> None:
        """Join all problems into one message."""
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _bool(raw: str) -> bool:
    states = ConfigParser.BOOLEAN_STATES
    if raw.lower() not in states:
        msg = f"not a boolean: {raw!r}"
        raise ValueError(msg)
    return states[raw.lower()]


def _items(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _ints(raw: str) -> tuple[int, ...]:
    return tuple(int(part) for part in _items(raw))


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(part) for part in _items(raw))


def _text(raw: str) -> str:
    return raw.strip()


def _stages(raw: str) -> frozenset[str]:
    return frozenset(_items(raw))


SCHEMA: Mapping[str, Mapping[str, Converter]] = {
    "data": {
        "manifest": _text,
        "safe_window": _floats,
        "nearmiss_window": _floats,
        "ratio": _floats,
        "seed": int,
        "short_side_min": int,
        "short_side_max": int,
        "crop_size": int,
        "workers": int,
    },
    "synth": {
        "n": int,
        "balance": float,
        "master_seed": int,
        "resolution": _ints,
        "fps": float,
        "duration_s": float,
        "workers": int,
    },
    "model": {
        "alpha": int,
        "beta_inv": int,
        "slow_frames": int,
        "backbone_depth": int,
        "base_width": int,
        "nonlocal_stages": _stages,
        "num_classes": int,
        "dropout_rate": float,
        "fusion_kernel": int,
        "fusion_channel_ratio": int,
    },
    "train": {
        "lr_min": float,
        "lr_max": float,
        "warmup_start": float,
        "warmup_epochs": int,
        "t_max": int,
        "per_iteration": _bool,
        "momentum": float,
        "weight_decay": float,
        "batch_size": int,
        "max_epochs": int,
        "seed": int,
        "init_seed": int,
        "smoothing_window": int,
        "slow_only": _bool,
    },
    "explain": {
        "layer": _text,
        "pathway": Pathway,
        "target": Label,
        "threshold": float,
        "opacity": float,
        "saliency_dir": _text,
        "frames": _ints,
        "max_clips": int,
    },
    "io": {"output_dir": _text},
}

_SCHEDULE_KEYS = (
    "lr_min",
    "lr_max",
    "warmup_start",
    "warmup_epochs",
    "t_max",
    "per_iteration",
)
_OPTIM_KEYS = ("momentum", "weight_decay", "batch_size", "max_epochs")


@dataclass(frozen=True)
class DataConfig:
    """Corpus location, segmentation, splitting and transforms."""

    manifest: str
    policy: SegmentationPolicy
    ratio: tuple[float, float, float]
    seed: int
    short_side_range: tuple[int, int]
    crop_size: int
    workers: int


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic corpus generation."""

    n: int
    balance: float
    master_seed: int
    resolution: tuple[int, int]
    fps: float
    duration_s: float
    workers: int


@dataclass(frozen=True)
class TrainConfig:
    """Schedule, optimizer and run-level training switches."""

    schedule: ScheduleConfig
    optim: OptimConfig
    seed: int
    init_seed: int
    smoothing_window: int
    slow_only: bool


@dataclass(frozen=True)
class ExplainConfig:
    """Heatmap layer, saliency comparison and overlay settings."""

    layer: str
    pathway: Pathway
    target: Label
    threshold: float
    opacity: float
    saliency_dir: str
    frames: tuple[int, ...]
    max_clips: int


@dataclass(frozen=True)
class RunConfig:
    """The validated configuration of one run."""

    data: DataConfig
    synth: SynthConfig
    model: PathwayConfig
    train: TrainConfig
    explain: ExplainConfig
    output_dir: Path
    raw: Mapping[str, Mapping[str, str]] = field(
        default_factory=dict, compare=False
    )

    def to_dict(self) -> dict[str, dict[str, str]]:
        """Effective values as written in the INI echo."""
        return {s: dict(values) for s, values in self.raw.items()}

    def write_echo(self, path: Path) -> None:
        """Write the effective configuration as an INI file."""
        parser = ConfigParser(interpolation=None)
        parser.read_dict(self.to_dict())
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            parser.write(handle)


def _read_ini(path: Path, problems: list[str]) -> ConfigParser:
    parser = ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string(path.read_text(encoding="utf-8"), source=str(path))
    except ConfigParserError as exc:
        problems.append(f"cannot parse {path}: {exc}")
    return parser


def resolve_user_config(path: Path) -> Path:
    """``path`` itself, or the packaged config of that name.

    Raises:
        FileNotFoundError: If neither exists

    """
    if path.exists():
        return path
    packaged = resolve_config_file(path.name)
    if packaged.exists() and path.parent == Path():
        return packaged
    msg = f"Config file not found: {path}"
    raise FileNotFoundError(msg)


def _merge(
    layer: ConfigParser,
    merged: dict[str, dict[str, str]],
    origin: str,
    problems: list[str],
) -> None:
    for section in layer.sections():
        if section not in SCHEMA:
            problems.append(f"{origin}: unknown section [{section}]")
            continue
        for key, value in layer.items(section):
            if key not in SCHEMA[section]:
                problems.append(f"{origin}: unknown key {section}.{key}")
                continue
            merged[section][key] = value


def _apply_overrides(
    overrides: Sequence[str],
    merged: dict[str, dict[str, str]],
    problems: list[str],
) -> None:
    for item in overrides:
        name, sep, value = item.partition("=")
        section, dot, key = name.strip().partition(".")
        if not sep or not dot:
            problems.append(
                f"override {item!r} must look like section.key=value"
            )
        elif section not in SCHEMA or key not in SCHEMA[section]:
            problems.append(f"override: unknown key {section}.{key}")
        else:
            merged[section][key] = value.strip()


def _convert(
    merged: Mapping[str, Mapping[str, str]], problems: list[str]
) -> dict[str, dict[str, Any]]:
    typed: dict[str, dict[str, Any]] = {}
    for section, keys in SCHEMA.items():
        typed[section] = {}
        for key, convert in keys.items():
            if key not in merged[section]:
                problems.append(f"missing value for {section}.{key}")
                continue
            raw = merged[section][key]
            try:
                typed[section][key] = convert(raw)
            except ValueError as exc:
                problems.append(f"{section}.{key} = {raw!r}: {exc}")
    return typed


class _SectionInvalid(Exception):  # noqa: N818
    """A section cannot be built; its problems are already recorded."""


def _pair(
    values: tuple[Any, ...], name: str, problems: list[str]
) -> tuple[Any, Any]:
    if len(values) != 2:  # noqa: PLR2004
        problems.append(f"{name} needs two values, got {len(values)}")
        raise _SectionInvalid
    return values[0], values[1]


def _data_config(data: dict[str, Any], problems: list[str]) -> DataConfig:
    safe = _pair(data["safe_window"], "data.safe_window", problems)
    near = _pair(data["nearmiss_window"], "data.nearmiss_window", problems)
    ratio = data["ratio"]
    ratio_issues = ratio_problems(ratio)
    problems.extend(f"data.{issue}" for issue in ratio_issues)
    if data["short_side_min"] > data["short_side_max"]:
        problems.append("data.short_side_min exceeds data.short_side_max")
    if data["crop_size"] > data["short_side_min"]:
        problems.append("data.crop_size exceeds data.short_side_min")
    if ratio_issues:
        raise _SectionInvalid
    return DataConfig(
        manifest=data["manifest"],
        policy=SegmentationPolicy(
            safe_window=Window(*safe),
            nearmiss_window=Window(*near, closed=True),
        ),
        ratio=(ratio[0], ratio[1], ratio[2]),
        seed=data["seed"],
        short_side_range=(data["short_side_min"], data["short_side_max"]),
        crop_size=data["crop_size"],
        workers=data["workers"],
    )


def _synth_config(synth: dict[str, Any], problems: list[str]) -> SynthConfig:
    resolution = _pair(synth["resolution"], "synth.resolution", problems)
    if synth["n"] < 1:
        problems.append("synth.n must be >= 1")
    if not 0.0 <= synth["balance"] <= 1.0:
        problems.append("synth.balance must be in [0, 1]")
    return SynthConfig(**{**synth, "resolution": resolution})


def _train_config(train: dict[str, Any], problems: list[str]) -> TrainConfig:
    window = train["smoothing_window"]
    if window < 1 or window % 2 == 0:
        problems.append("train.smoothing_window must be a positive odd int")
    optim: OptimConfig | None = None
    try:
        optim = OptimConfig(**{k: train[k] for k in _OPTIM_KEYS})
    except NearMissError as exc:
        problems.append(f"[train] {exc}")
    schedule = ScheduleConfig(**{k: train[k] for k in _SCHEDULE_KEYS})
    if optim is None:
        raise _SectionInvalid
    return TrainConfig(
        schedule=schedule,
        optim=optim,
        seed=train["seed"],
        init_seed=train["init_seed"],
        smoothing_window=window,
        slow_only=train["slow_only"],
    )


def _explain_config(
    explain: dict[str, Any], problems: list[str]
) -> ExplainConfig:
    if not 0.0 < explain["threshold"] <= 1.0:
        problems.append("explain.threshold must be in (0, 1]")
    if not 0.0 <= explain["opacity"] <= 1.0:
        problems.append("explain.opacity must be in [0, 1]")
    if explain["max_clips"] < 1:
        problems.append("explain.max_clips must be >= 1")
    return ExplainConfig(**explain)


_BUILDERS: Mapping[str, Callable[[dict[str, Any], list[str]], Any]] = {
    "data": _data_config,
    "synth": _synth_config,
    "model": lambda values, _problems: PathwayConfig(**values),
    "train": _train_config,
    "explain": _explain_config,
}


def _build(
    typed: dict[str, dict[str, Any]], problems: list[str]
) -> dict[str, Any]:
    built: dict[str, Any] = {}
    for section, builder in _BUILDERS.items():
        if len(typed[section]) < len(SCHEMA[section]):
            continue
        try:
            built[section] = builder(typed[section], problems)
        except NearMissError as exc:
            problems.append(f"[{section}] {exc}")
        except _SectionInvalid:
            pass
    return built


def load_config(
    path: Path | None = None,
    overrides: Sequence[str] = (),
    env: Mapping[str, str] | None = None,
) -> RunConfig:
    """Load, layer and validate the run configuration.

    Args:
        path: User INI file layered over the packaged defaults
        overrides: ``section.key=value`` strings applied last
        env: Environment consulted for :data:`OUTPUT_DIR_ENV`

    Returns:
        The validated configuration

    Raises:
        ConfigValidationError: Listing every problem found
        FileNotFoundError: If ``path`` does not exist

    """
    problems: list[str] = []
    merged: dict[str, dict[str, str]] = {s: {} for s in SCHEMA}
    _merge(
        _read_ini(resolve_config_file("default.ini"), problems),
        merged,
        "default.ini",
        problems,
    )
    if path is not None:
        user = resolve_user_config(path)
        _merge(_read_ini(user, problems), merged, str(user), problems)
    _apply_overrides(overrides, merged, problems)
    environ = os.environ if env is None else env
    if environ.get(OUTPUT_DIR_ENV):
        merged["io"]["output_dir"] = environ[OUTPUT_DIR_ENV]

    typed = _convert(merged, problems)
    built = _build(typed, problems)
    output_dir = typed.get("io", {}).get("output_dir", "")
    if not output_dir:
        problems.append("io.output_dir must not be empty")
    if problems:
        raise ConfigValidationError(problems)
    logger.debug("Loaded configuration (user file: %s)", path)
    return RunConfig(
        data=built["data"],
        synth=built["synth"],
        model=built["model"],
        train=built["train"],
        explain=built["explain"],
        output_dir=Path(output_dir).expanduser(),
        raw=merged,
    )
