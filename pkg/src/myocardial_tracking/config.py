"""
Run configuration document.

A run is described by one nested JSON document with the sections backbone, corr,
refiner, train and phantom plus a few top-level settings. Unknown keys are rejected
at every level; missing keys take their defaults. Every command writes the fully
resolved document next to its outputs.
"""

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple, Type, TypeVar, Union

from .autograd import set_default_dtype, set_deterministic
from .backbones import BackboneConfig
from .data import PhantomSpec
from .errors import ConfigError
from .models import CorrConfig, RefinerConfig, TrackerConfig
from .training import TrainConfig

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = "resolved_config.json"
DTYPES: Tuple[str, ...] = ("float32", "float64")

# Run-wide settings that the train section inherits from the top level.
_INHERITED_TRAIN_KEYS = ("seed", "deterministic")

C = TypeVar("C")


def _build_section(cls: Type[C], data: Mapping[str, Any], section: str, exclude: Tuple[str, ...] = ()) -> C:
    if not isinstance(data, Mapping):
        raise ConfigError(f"section '{section}' must be an object, got {type(data).__name__}")
    allowed = {f.name for f in dataclasses.fields(cls)} - set(exclude)  # type: ignore[arg-type]
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key '{section}.{key}'")
    try:
        return cls(**dict(data))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid section '{section}': {exc}") from exc


def _section_dict(obj: Any, exclude: Tuple[str, ...] = ()) -> Dict[str, Any]:
    data = {}
    for f in dataclasses.fields(obj):
        if f.name in exclude:
            continue
        value = getattr(obj, f.name)
        data[f.name] = list(value) if isinstance(value, tuple) else value
    return data


@dataclass
class RunConfig:
    """
    Complete configuration of a run.

    Attributes:
        backbone: Feature extractor settings
        corr: Correlation settings
        refiner: Refinement transformer settings
        train: Optimisation settings (seed and deterministic come from the top level)
        phantom: Phantom data settings
        seed: Seed for parameter initialisation, shuffling and augmentation
        deterministic: Single worker and fixed reduction order everywhere
        dtype: Floating point type of every tensor ("float32" or "float64")
        train_samples: Phantom clips used for training
        eval_samples: Held-out phantom clips used for evaluation and ablation
    """

    backbone: BackboneConfig = field(default_factory=BackboneConfig)
    corr: CorrConfig = field(default_factory=CorrConfig)
    refiner: RefinerConfig = field(default_factory=RefinerConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    phantom: PhantomSpec = field(default_factory=PhantomSpec)
    seed: int = 0
    deterministic: bool = False
    dtype: str = "float32"
    train_samples: int = 200
    eval_samples: int = 20

    _SECTIONS = {
        "backbone": BackboneConfig,
        "corr": CorrConfig,
        "refiner": RefinerConfig,
        "train": TrainConfig,
        "phantom": PhantomSpec,
    }

    def __post_init__(self) -> None:
        self.train = dataclasses.replace(self.train, seed=self.seed, deterministic=self.deterministic)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        """
        Build a configuration from a nested mapping.

        Raises:
            ConfigError: On unknown keys or malformed sections
        """
        if not isinstance(data, Mapping):
            raise ConfigError("run configuration must be a JSON object")
        kwargs: Dict[str, Any] = {}
        scalar_keys = {"seed", "deterministic", "dtype", "train_samples", "eval_samples"}
        for key, value in data.items():
            if key in cls._SECTIONS:
                exclude = _INHERITED_TRAIN_KEYS if key == "train" else ()
                kwargs[key] = _build_section(cls._SECTIONS[key], value, key, exclude)
            elif key in scalar_keys:
                kwargs[key] = value
            else:
                raise ConfigError(f"unknown key '{key}'")
        config = cls(**kwargs)
        config.validate()
        return config

    def to_dict(self) -> Dict[str, Any]:
        return {
            "backbone": _section_dict(self.backbone),
            "corr": _section_dict(self.corr),
            "refiner": _section_dict(self.refiner),
            "train": _section_dict(self.train, _INHERITED_TRAIN_KEYS),
            "phantom": _section_dict(self.phantom),
            "seed": self.seed,
            "deterministic": self.deterministic,
            "dtype": self.dtype,
            "train_samples": self.train_samples,
            "eval_samples": self.eval_samples,
        }

    def validate(self) -> None:
        if self.dtype not in DTYPES:
            raise ConfigError(f"dtype must be one of {DTYPES}, got '{self.dtype}'")
        if self.train_samples < 0 or self.eval_samples < 0:
            raise ConfigError("train_samples and eval_samples must be >= 0")
        self.tracker_config().validate()
        self.train.validate()
        self.phantom.validate()

    def tracker_config(self) -> TrackerConfig:
        return TrackerConfig(backbone=self.backbone, corr=self.corr, refiner=self.refiner)

    def apply_runtime(self) -> None:
        """Install the configured precision and determinism process-wide."""
        set_default_dtype(self.dtype)
        set_deterministic(self.deterministic)

    def with_overrides(self, **changes: Any) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, directory: Union[str, Path]) -> Path:
        """Write resolved_config.json into `directory`."""
        path = Path(directory) / RESOLVED_CONFIG_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps())
        logger.debug("wrote %s", path)
        return path


def load_run_config(path: Union[str, Path, None]) -> RunConfig:
    """
    Read a run configuration file; None gives the defaults.

    A directory is accepted and resolved to its resolved_config.json.
    """
    if path is None:
        config = RunConfig()
        config.validate()
        return config
    path = Path(path)
    if path.is_dir():
        path = path / RESOLVED_CONFIG_NAME
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(data)
