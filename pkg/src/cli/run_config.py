"""
Run configuration: a validated tree of sections loaded from a TOML file and
overridden by ``--section.key value`` flags
"""
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, get_args, get_origin
import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, field_validator

from config import Config
from ..contrastive import Indexing, PairSimilarity, Reduction
from ..errors import ConfigError
from ..prototype import CorrelationMetric
from .strategies import parse_strategy

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", use_enum_values=False)


class DataSection(Section):
    root: Optional[Path] = None
    split: Literal["all", "train", "test"] = "all"


class GenSection(Section):
    classes: int = Field(Config.GEN_CLASSES, ge=2)
    labels: int = Field(Config.GEN_LABELS, ge=1, le=Config.MAX_PGM_VALUE)
    regions: int = Field(Config.GEN_REGIONS, ge=1)
    width: int = Field(Config.GEN_WIDTH, ge=1)
    height: int = Field(Config.GEN_HEIGHT, ge=1)
    pairs: List[str] = Field(default_factory=lambda: list(Config.GEN_PAIRS))
    background: float = Field(Config.GEN_BACKGROUND, ge=0.0, lt=1.0)
    per_class: int = Field(Config.GEN_PER_CLASS, ge=2)
    noise: float = Field(Config.GEN_FEATURE_NOISE, ge=0.0)
    distractors: int = Field(Config.GEN_DISTRACTORS, ge=0)
    distractor_scale: float = Field(Config.GEN_DISTRACTOR_SCALE, ge=0.0)
    train_fraction: float = Field(Config.GEN_TRAIN_FRACTION, gt=0.0, lt=1.0)


class PrototypeSection(Section):
    metric: CorrelationMetric = CorrelationMetric.COSINE
    archive: Optional[Path] = None


class LabelsSection(Section):
    strategy: str = "hard"
    epsilon: float = Field(Config.LSR_EPSILON, gt=0.0, lt=1.0)
    step: int = Field(Config.DEFAULT_STEP, ge=1)
    cap: float = Field(Config.CONFIDENCE_CAP, gt=0.0, lt=1.0)
    epochs: List[int] = Field(default_factory=list)

    @field_validator("strategy")
    @classmethod
    def _strategy(cls, value: str) -> str:
        return parse_strategy(value).name

    @field_validator("epochs")
    @classmethod
    def _epochs(cls, value: List[int]) -> List[int]:
        if any(e < 1 for e in value):
            raise ValueError("epochs are 1-based")
        return value


class BclSection(Section):
    contrastive: Literal["none", "bcl", "cl"] = "none"
    indexing: Indexing = Indexing.ENTRY
    similarity: PairSimilarity = PairSimilarity.COSINE
    reduction: Reduction = Reduction.MEAN_INTER_INTRA
    weight: float = Field(1.0, ge=0.0)


class TrainSection(Section):
    epochs: int = Field(Config.EPOCHS, ge=0)
    batch_size: int = Field(Config.BATCH_SIZE, ge=1)
    learning_rate: float = Field(Config.LEARNING_RATE, gt=0.0)
    weight_decay: float = Field(Config.WEIGHT_DECAY, ge=0.0)
    hidden: List[int] = Field(default_factory=lambda: [Config.HIDDEN_WIDTH])
    shuffle: bool = True
    record_timing: bool = False

    @field_validator("hidden")
    @classmethod
    def _hidden(cls, value: List[int]) -> List[int]:
        if any(width < 1 for width in value):
            raise ValueError("hidden widths must be positive")
        return value


class BenchSection(Section):
    strategies: List[str] = Field(default_factory=lambda: ["hard", "lsr", "gls", "gls+bcl"])
    seeds: List[int] = Field(default_factory=lambda: list(range(10)))
    steps: List[int] = Field(default_factory=list)
    workers: int = Field(Config.WORKERS, ge=1)

    @field_validator("strategies")
    @classmethod
    def _strategies(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one strategy is required")
        return [parse_strategy(name).name for name in value]

    @field_validator("seeds")
    @classmethod
    def _seeds(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one seed is required")
        if any(s < 0 or s > MAX_SEED for s in value):
            raise ValueError("seeds must be unsigned 64-bit integers")
        return value

    @field_validator("steps")
    @classmethod
    def _steps(cls, value: List[int]) -> List[int]:
        if any(s < 0 for s in value):
            raise ValueError("steps must be nonnegative")
        return value


class GradcheckSection(Section):
    trials: int = Field(1, ge=1)
    step: float = Field(Config.GRADCHECK_STEP, gt=0.0)


class EvalSection(Section):
    checkpoint: Optional[Path] = None
    split: Literal["train", "test"] = "test"


class RunConfig(Section):
    seed: int = Field(0, ge=0, le=MAX_SEED)
    out: Path = Path(Config.OUTPUT_ROOT)
    quiet: bool = False
    data: DataSection = Field(default_factory=DataSection)
    gen: GenSection = Field(default_factory=GenSection)
    prototype: PrototypeSection = Field(default_factory=PrototypeSection)
    labels: LabelsSection = Field(default_factory=LabelsSection)
    bcl: BclSection = Field(default_factory=BclSection)
    train: TrainSection = Field(default_factory=TrainSection)
    bench: BenchSection = Field(default_factory=BenchSection)
    gradcheck: GradcheckSection = Field(default_factory=GradcheckSection)
    eval: EvalSection = Field(default_factory=EvalSection)


def read_config_file(path) -> Dict[str, Any]:
    """Raw key tree of a TOML config file; dotted keys nest"""
    path = Path(path)
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Malformed config file {path}: {e}") from e


def _is_list_field(section: Optional[str], key: str) -> bool:
    model = RunConfig
    if section is not None:
        field = RunConfig.model_fields.get(section)
        if field is None:
            return False
        model = field.annotation
    field = model.model_fields.get(key) if isinstance(model, type) and issubclass(model, BaseModel) else None
    if field is None:
        return False
    annotation = field.annotation
    if get_origin(annotation) is list:
        return True
    return any(get_origin(arg) is list for arg in get_args(annotation))


def parse_overrides(tokens: Sequence[str]) -> Dict[str, Any]:
    """``--section.key value`` / ``--section.key=value`` tokens to a nested dict of raw strings"""
    overrides: Dict[str, Any] = {}
    tokens = list(tokens)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--"):
            raise ConfigError(f"Unexpected argument {token!r}")
        key, eq, value = token[2:].partition("=")
        if not eq:
            if i + 1 >= len(tokens):
                raise ConfigError(f"Flag --{key} needs a value")
            value = tokens[i + 1]
            i += 1
        i += 1
        parts = key.split(".")
        if len(parts) != 2 or not all(parts):
            raise ConfigError(f"Unknown flag --{key}; expected --<section>.<key>")
        section, leaf = parts
        section = section.replace("-", "_")
        leaf = leaf.replace("-", "_")
        if _is_list_field(section, leaf):
            value = [item.strip() for item in value.split(",") if item.strip()]
        overrides.setdefault(section, {})[leaf] = value
    return overrides


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(path=None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build and validate the run configuration

    Args:
        path: Optional TOML config file
        overrides: Nested dict from the command line; wins over the file

    Returns:
        Validated RunConfig (pydantic ValidationError on bad or unknown keys)
    """
    data = read_config_file(path) if path is not None else {}
    data = _merge(data, overrides or {})
    config = RunConfig.model_validate(data)
    logger.debug(f"Run configuration: {config.model_dump(mode='json')}")
    return config
