"""
Experiment configuration: one JSON document per experiment.

Sections: pde, grid, sampler, dataset, network, training, evaluation. Every
section is checked for unknown and missing keys before any work starts.
"""

import json
import math
import os
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional

from typing_extensions import Self

from config import Config
from core.grid import make_uniform_periodic_grid, perturb_and_permute_grid
from core.types import GridSet
from model.network import NetworkDims
from sampling.grid2d import make_2d_unstructured_grid
from sampling.rng import make_rng
from sampling.samplers import Sampler, build_sampler
from sampling.validation import NAMED_INITIAL_CONDITIONS
from solvers.pde import PdeSpec, pde_from_dict
from training.config import TrainingConfig
from utils.errors import ConfigError, InvalidArgumentError

SECTIONS = ("name", "pde", "grid", "sampler", "dataset", "network", "training", "evaluation")


def _strict(cls, data: Any, section: str, required=()) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(f"'{section}' must be an object")
    unknown = set(data) - {f.name for f in fields(cls)}
    if unknown:
        raise ConfigError(f"Unknown keys in '{section}': {sorted(unknown)}")
    missing = [key for key in required if key not in data]
    if missing:
        raise ConfigError(f"Missing keys in '{section}': {missing}")
    return data


@dataclass(frozen=True)
class GridConfig:
    """
    "uniform_periodic": n_nodes, length, origin, optional perturbation
    (fraction, seed). `permute` shuffles the storage order with perturb_seed
    even when no perturbation is asked for; any perturbation also shuffles.
    "unstructured_2d": n_interior, n_per_edge, seed.
    """

    kind: str = "uniform_periodic"
    n_nodes: int = 50
    length: float = Config.TWO_PI
    origin: float = 0.0
    perturb_fraction: float = 0.0
    perturb_seed: int = 0
    permute: bool = False
    n_interior: int = 200
    n_per_edge: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform_periodic", "unstructured_2d"):
            raise ConfigError(f"Unknown grid kind '{self.kind}'")
        if self.kind == "uniform_periodic" and self.n_nodes < 2:
            raise ConfigError(f"n_nodes must be >= 2, got {self.n_nodes}")
        if not 0.0 <= self.perturb_fraction < 0.5:
            raise ConfigError(f"perturb_fraction must lie in [0, 0.5), got {self.perturb_fraction}")

    @property
    def dim(self) -> int:
        return 2 if self.kind == "unstructured_2d" else 1

    def build(self) -> GridSet:
        if self.kind == "unstructured_2d":
            return make_2d_unstructured_grid(make_rng(self.seed), self.n_interior, self.n_per_edge)
        grid = make_uniform_periodic_grid(self.n_nodes, self.length, self.origin)
        if self.perturb_fraction > 0.0 or self.permute:
            grid = perturb_and_permute_grid(grid, self.perturb_fraction, self.perturb_seed)
        return grid

    @property
    def n_grid_nodes(self) -> int:
        if self.kind == "unstructured_2d":
            return self.n_interior + 4 * self.n_per_edge + 4
        return self.n_nodes

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Self:
        return cls(**_strict(cls, data, "grid", required=("kind",)))


@dataclass(frozen=True)
class DatasetConfig:
    n_sequences: int
    n_steps: int
    dt: float
    seed: int = 0

    def __post_init__(self):
        if self.n_sequences < 1:
            raise ConfigError(f"n_sequences must be >= 1, got {self.n_sequences}")
        if self.n_steps < 1:
            raise ConfigError(f"n_steps must be >= 1, got {self.n_steps}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Self:
        return cls(**_strict(cls, data, "dataset", required=("n_sequences", "n_steps", "dt")))


@dataclass(frozen=True)
class NetworkConfig:
    """Network shape; the input size comes from the grid and the PDE"""

    width: Optional[int] = None
    depth: int = 1
    thickness: int = 5
    assembly_depth: int = 1
    lift: str = "identity"
    init_seed: int = 0
    output_scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.output_scale) and self.output_scale >= 0.0):
            raise ConfigError(f"output_scale must be finite and non-negative, got {self.output_scale}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Self:
        return cls(**_strict(cls, data, "network"))


@dataclass(frozen=True)
class EvaluationConfig:
    initial_conditions: List[str] = field(default_factory=list)
    horizon: float = 1.0
    slice_times: List[float] = field(default_factory=list)

    def __post_init__(self):
        unknown = [n for n in self.initial_conditions if n not in NAMED_INITIAL_CONDITIONS]
        if unknown:
            raise ConfigError(f"Unknown initial conditions {unknown}")
        if self.horizon < 0:
            raise ConfigError(f"horizon must be >= 0, got {self.horizon}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Self:
        data = dict(_strict(cls, data, "evaluation"))
        for key in ("initial_conditions", "slice_times"):
            if key in data:
                data[key] = list(data[key])
        return cls(**data)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    pde: PdeSpec
    grid: GridConfig
    sampler_config: Dict[str, Any]
    dataset: DatasetConfig
    network: NetworkConfig
    training: TrainingConfig
    evaluation: EvaluationConfig
    raw: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def network_dims(self) -> NetworkDims:
        n_inputs = self.grid.n_grid_nodes * self.pde.n_components
        return NetworkDims(
            n_nodes=self.grid.n_grid_nodes,
            width=self.network.width or n_inputs,
            depth=self.network.depth,
            thickness=self.network.thickness,
            assembly_depth=self.network.assembly_depth,
            n_components=self.pde.n_components,
            lift=self.network.lift,
        )

    def build_sampler(self) -> Sampler:
        return build_sampler(self.sampler_config)

    def with_seed(self, seed: int) -> Self:
        raw = json.loads(json.dumps(self.raw))
        raw["dataset"]["seed"] = int(seed)
        return ExperimentConfig.from_dict(raw)

    def to_dict(self) -> Dict[str, Any]:
        return json.loads(json.dumps(self.raw))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Self:
        """
        Parse and cross-check a whole experiment document

        Raises:
            ConfigError: on unknown, missing or inconsistent settings
        """
        if not isinstance(data, dict):
            raise ConfigError("Experiment config must be a JSON object")
        unknown = set(data) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"Unknown experiment sections: {sorted(unknown)}")
        missing = [s for s in ("pde", "grid", "sampler", "dataset") if s not in data]
        if missing:
            raise ConfigError(f"Missing experiment sections: {missing}")

        try:
            config = cls(
                name=str(data.get("name", "experiment")),
                pde=pde_from_dict(data["pde"]),
                grid=GridConfig.from_dict(data["grid"]),
                sampler_config=data["sampler"],
                dataset=DatasetConfig.from_dict(data["dataset"]),
                network=NetworkConfig.from_dict(data.get("network", {})),
                training=TrainingConfig.from_dict(data.get("training", {})),
                evaluation=EvaluationConfig.from_dict(data.get("evaluation", {})),
                raw=json.loads(json.dumps(data)),
            )
            sampler = config.build_sampler()
            config.network_dims
        except (InvalidArgumentError, TypeError) as exc:
            raise ConfigError(f"Invalid experiment config: {exc}") from exc

        if config.grid.dim != config.pde.dim:
            raise ConfigError(f"PDE '{config.pde.kind}' needs a {config.pde.dim}D grid")
        if sampler.dim != config.pde.dim or sampler.n_components != config.pde.n_components:
            raise ConfigError(
                f"Sampler draws {sampler.n_components} component(s) in {sampler.dim}D; PDE "
                f"'{config.pde.kind}' needs {config.pde.n_components} in {config.pde.dim}D"
            )
        if config.training.n_steps > config.dataset.n_steps:
            raise ConfigError("training.n_steps exceeds dataset.n_steps")
        if config.training.batch_size > config.dataset.n_sequences:
            raise ConfigError("training.batch_size exceeds dataset.n_sequences")
        steps = config.evaluation.horizon / config.dataset.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigError("evaluation.horizon must be a multiple of dataset.dt")
        return config


def resolve_config_path(name_or_path: str) -> str:
    """A path, or a preset name looked up in Config.PRESETS_DIR"""
    if os.path.exists(name_or_path):
        return name_or_path
    candidate = os.path.join(Config.PRESETS_DIR, name_or_path)
    if not candidate.endswith(".json"):
        candidate += ".json"
    if os.path.exists(candidate):
        return candidate
    raise ConfigError(f"No config file or preset named '{name_or_path}'")


def load_experiment_config(name_or_path: str) -> ExperimentConfig:
    path = resolve_config_path(name_or_path)
    try:
        with open(path) as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def training_horizon(config: ExperimentConfig) -> float:
    return config.training.n_steps * config.dataset.dt


def extrapolation_factor(config: ExperimentConfig) -> float:
    horizon = training_horizon(config)
    return config.evaluation.horizon / horizon if horizon > 0 else math.inf
