from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict

from typing_extensions import Self

from config import Config
from utils.errors import ConfigError


def _strict(cls, data: Dict[str, Any], section: str) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(f"'{section}' must be an object")
    unknown = set(data) - {f.name for f in fields(cls)}
    if unknown:
        raise ConfigError(f"Unknown keys in '{section}': {sorted(unknown)}")
    return data


@dataclass(frozen=True)
class ScheduleConfig:
    """Learning-rate schedule: "cyclic" (triangle under a decaying envelope) or "constant" """

    kind: str = "cyclic"
    lr_max: float = Config.LR_MAX
    lr_min: float = Config.LR_MIN
    decay: float = Config.LR_DECAY
    period_steps: int = Config.LR_PERIOD_STEPS
    lr: float = Config.LR_MAX

    def __post_init__(self):
        if self.kind not in ("cyclic", "constant"):
            raise ConfigError(f"Unknown schedule kind '{self.kind}'")
        if self.kind == "cyclic":
            if not 0 < self.lr_min <= self.lr_max:
                raise ConfigError(f"Need 0 < lr_min <= lr_max, got {self.lr_min}, {self.lr_max}")
            if not 0 < self.decay <= 1:
                raise ConfigError(f"decay must lie in (0, 1], got {self.decay}")
            if self.period_steps < 1:
                raise ConfigError(f"period_steps must be >= 1, got {self.period_steps}")
        elif not self.lr > 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Self:
        return cls(**_strict(cls, data, "schedule"))


@dataclass(frozen=True)
class AdamConfig:
    beta1: float = Config.ADAM_BETA1
    beta2: float = Config.ADAM_BETA2
    epsilon: float = Config.ADAM_EPSILON

    def __post_init__(self):
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.epsilon > 0):
            raise ConfigError("Adam needs 0 <= beta1, beta2 < 1 and epsilon > 0")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Self:
        return cls(**_strict(cls, data, "adam"))


@dataclass(frozen=True)
class TrainingConfig:
    """
    Training settings.

    n_steps is the recurrence length n_L of the loss; shards > 1 splits each
    batch into fixed-order shards evaluated on worker threads.
    """

    n_steps: int = 1
    epochs: int = 1
    batch_size: int = 50
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    adam: AdamConfig = field(default_factory=AdamConfig)
    shuffle_seed: int = 0
    log_every: int = 10
    shards: int = 1

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError(f"n_L must be >= 1, got {self.n_steps}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.log_every < 1 or self.shards < 1:
            raise ConfigError("log_every and shards must be >= 1")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Self:
        data = dict(_strict(cls, data, "training"))
        if "schedule" in data:
            data["schedule"] = ScheduleConfig.from_dict(data["schedule"])
        if "adam" in data:
            data["adam"] = AdamConfig.from_dict(data["adam"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"Invalid training config: {exc}") from exc
