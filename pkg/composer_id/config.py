import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Tuple

from dotenv import dotenv_values

from composer_id.constants import (
    ARCH_CNN,
    ARCHITECTURES,
    BATCH_SIZE,
    CHECKPOINT_FILE,
    CLIP_SECONDS,
    COMMANDS,
    DEFAULT_FPS,
    EARLY_STOP_PATIENCE,
    LEARNING_RATE,
    MAX_EPOCHS,
    ROLL_VARIANTS,
    VARIANT_ALL_ROLLS,
    VARIANT_LOGMEL,
    VARIANTS,
)

logger = logging.getLogger("composer_id.config")

TRUE_WORDS = ("1", "true", "yes", "on")
FALSE_WORDS = ("0", "false", "no", "off")


@dataclass(frozen=True)
class RunSpec:
    """
    One CLI invocation: the command, an optional config file, ``key=value``
    overrides in increasing precedence, and positional paths.
    """

    command: str
    config_path: Optional[str] = None
    overrides: Tuple[str, ...] = ()
    paths: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}; expected one of {COMMANDS}")

    def load(self) -> "RunConfig":
        return load_config(self.config_path, self.overrides)


@dataclass(frozen=True)
class RunConfig:
    """
    Experiment settings.

    Empty path fields are derived from ``out_dir`` (see the ``*_path``
    properties).
    """

    manifest: str = "catalog.tsv"
    midi_dir: str = "midi"
    audio_dir: str = ""
    metadata: str = ""
    out_dir: str = "runs/default"
    cache: str = ""
    audio_cache: str = ""
    checkpoint: str = ""
    input: str = ""
    seed: int = 0
    k: int = 10
    arch: str = ARCH_CNN
    variant: str = VARIANT_ALL_ROLLS
    fps: int = DEFAULT_FPS
    clip_seconds: float = CLIP_SECONDS
    max_epochs: int = MAX_EPOCHS
    patience: int = EARLY_STOP_PATIENCE
    batch_size: int = BATCH_SIZE
    lr: float = LEARNING_RATE
    gru_hidden: int = 256
    fc_hidden: int = 512
    channel_divisor: int = 1
    crnn_summary: str = "max"
    sustain_pedal: bool = False
    eval_batch_size: int = BATCH_SIZE

    def __post_init__(self) -> None:
        if self.arch not in ARCHITECTURES:
            raise ValueError(f"invalid grid cell: arch={self.arch!r} (expected one of {ARCHITECTURES})")
        if self.variant not in VARIANTS:
            raise ValueError(f"invalid grid cell: variant={self.variant!r} (expected one of {VARIANTS})")
        if self.k < 1:
            raise ValueError(f"invalid grid cell: k={self.k} (must be >= 1)")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        for name in ("fps", "batch_size", "eval_batch_size", "gru_hidden", "fc_hidden", "channel_divisor", "patience"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if not self.clip_seconds > 0 or not self.lr > 0:
            raise ValueError("clip_seconds and lr must be > 0")
        if self.crnn_summary not in ("max", "last"):
            raise ValueError(f"crnn_summary must be 'max' or 'last', got {self.crnn_summary!r}")

    @property
    def in_channels(self) -> int:
        return 1 if self.variant == VARIANT_LOGMEL else len(ROLL_VARIANTS[self.variant])

    @property
    def out_path(self) -> Path:
        return Path(self.out_dir)

    @property
    def cache_path(self) -> Path:
        return Path(self.cache) if self.cache else self.out_path / "features.ccf"

    @property
    def audio_cache_path(self) -> Path:
        return Path(self.audio_cache) if self.audio_cache else self.out_path / "features_logmel.ccf"

    @property
    def features_path(self) -> Path:
        """Cache matching ``variant``."""
        return self.audio_cache_path if self.variant == VARIANT_LOGMEL else self.cache_path

    @property
    def checkpoint_path(self) -> Path:
        return Path(self.checkpoint) if self.checkpoint else self.out_path / CHECKPOINT_FILE


CONFIG_FIELDS = fields(RunConfig)


def _convert(name: str, raw: str, kind) -> object:
    text = raw.strip()
    if kind is bool:
        if text.lower() in TRUE_WORDS:
            return True
        if text.lower() in FALSE_WORDS:
            return False
        raise ValueError(f"config key {name!r}: expected a boolean, got {raw!r}")
    try:
        return kind(text)
    except ValueError:
        raise ValueError(f"config key {name!r}: expected {kind.__name__}, got {raw!r}") from None


def parse_overrides(items: Sequence[str]) -> Dict[str, str]:
    """``["seed=3", "k = 10"]`` -> ``{"seed": "3", "k": "10"}``."""
    values = {}
    for item in items:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def config_from_mapping(values: Mapping[str, Optional[str]]) -> RunConfig:
    """
    Typed ``RunConfig`` from string values.

    Raises
    ------
    ValueError
        On an unknown key (named in the message) or a value of the wrong type.
    """
    known = {f.name: f for f in CONFIG_FIELDS}
    kwargs = {}
    for key, raw in values.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        if raw is None:
            raise ValueError(f"config key {key!r} has no value")
        kwargs[key] = _convert(key, raw, type(known[key].default))
    return RunConfig(**kwargs)


def load_config(path: Optional[str] = None, overrides: Sequence[str] = ()) -> RunConfig:
    """
    Read a ``key = value`` config file and apply overrides on top.

    Parameters
    ----------
    path : str, optional
        Config file; ``#`` starts a comment. Defaults only when omitted.
    overrides : sequence of str
        ``key=value`` items applied in order after the file.

    Returns
    -------
    RunConfig
    """
    values: Dict[str, Optional[str]] = {}
    if path:
        if not Path(path).is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        values.update(dotenv_values(path, interpolate=False))
        logger.debug("Loaded %d config keys from %s", len(values), path)
    values.update(parse_overrides(overrides))
    return config_from_mapping(values)


def _render(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def dump_config(config: RunConfig) -> str:
    """Serialize to ``key = value`` lines in field order; ``load_config`` reads it back."""
    data = asdict(config)
    return "".join(f"{f.name} = {_render(data[f.name])}\n" for f in CONFIG_FIELDS)
