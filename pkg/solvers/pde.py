"""
PDE specifications understood by the reference solvers.

Each spec is a frozen dataclass tagged by `kind`; `pde_from_dict` builds one
from the "pde" section of an experiment config and rejects unknown keys.
"""

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Optional, Tuple

import numpy as np

from config import Config
from sampling.fields import evaluate_fourier_series
from utils.errors import ConfigError, InvalidArgumentError


@dataclass(frozen=True)
class FixedFourierSeries:
    """Deterministic coefficient function a0 + sum(a_n cos nx + b_n sin nx)"""

    a0: float
    a: Tuple[float, ...] = ()
    b: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if len(self.a) != len(self.b):
            raise InvalidArgumentError("Fourier series needs as many sine as cosine coefficients")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return evaluate_fourier_series(self.a0, self.a, self.b, x)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FixedFourierSeries":
        unknown = set(data) - {"a0", "a", "b", "scale"}
        if unknown:
            raise ConfigError(f"Unknown keys in Fourier series: {sorted(unknown)}")
        scale = float(data.get("scale", 1.0))
        return cls(
            a0=float(data["a0"]),
            a=tuple(scale * v for v in data.get("a", ())),
            b=tuple(scale * v for v in data.get("b", ())),
        )


def load_reference_coefficients() -> Tuple[FixedFourierSeries, FixedFourierSeries]:
    """alpha(x) and kappa(x) from the checked-in coefficient fragment"""
    path = os.path.join(Config.PRESETS_DIR, "advdiff_coefficients.json")
    with open(path) as handle:
        data = json.load(handle)
    return FixedFourierSeries.from_dict(data["alpha"]), FixedFourierSeries.from_dict(data["kappa"])


@dataclass(frozen=True)
class PdeSpec:
    kind = "abstract"
    n_components = 1
    dim = 1

    def substeps_for(self, dt: float) -> int:
        max_dt = getattr(self, "max_dt", None)
        if not max_dt:
            return 1
        return max(1, math.ceil(dt / max_dt - 1e-9))

    def to_dict(self) -> Dict[str, Any]:
        data = {"kind": self.kind}
        for item in fields(self):
            value = getattr(self, item.name)
            data[item.name] = asdict(value) if isinstance(value, FixedFourierSeries) else value
        return json.loads(json.dumps(data))


@dataclass(frozen=True)
class AdvectionDiffusion1D(PdeSpec):
    """u_t + (alpha u)_x = (kappa u_x)_x on a periodic interval"""

    kind = "advection_diffusion_1d"
    alpha: FixedFourierSeries = field(default_factory=lambda: FixedFourierSeries(1.0))
    kappa: FixedFourierSeries = field(default_factory=lambda: FixedFourierSeries(1e-3))
    max_dt: Optional[float] = 0.005

    def check_grid_nodes(self, x: np.ndarray):
        if np.any(self.kappa.evaluate(x) <= 0):
            raise InvalidArgumentError("kappa(x) must be positive at every node")


@dataclass(frozen=True)
class FourthOrder(PdeSpec):
    """u_t + c u_xxxx = 0"""

    kind = "fourth_order"
    c: float = 1e-2

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidArgumentError(f"c must be positive, got {self.c}")


@dataclass(frozen=True)
class ViscousBurgers(PdeSpec):
    kind = "viscous_burgers"
    nu: float = 0.1
    max_dt: Optional[float] = 0.0025

    def __post_init__(self):
        if self.nu < 0:
            raise InvalidArgumentError(f"nu must be non-negative, got {self.nu}")


@dataclass(frozen=True)
class InviscidBurgers(PdeSpec):
    kind = "inviscid_burgers"
    cfl: float = Config.WENO_CFL


@dataclass(frozen=True)
class WaveSystem(PdeSpec):
    """u_t = A u_x with A = [[0, 1], [1, 0]]"""

    kind = "wave_system"
    n_components = 2


@dataclass(frozen=True)
class AdvDiff2D(PdeSpec):
    """u_t + div(alpha u) = kappa lap(u), alpha = scale*(y, -x), zero Dirichlet on [-1,1]^2"""

    kind = "advection_diffusion_2d"
    dim = 2
    kappa: float = 5e-3
    velocity_scale: float = 1.0
    fine_grid: int = Config.FINE_GRID_2D
    max_dt: Optional[float] = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidArgumentError(f"kappa must be positive, got {self.kappa}")
        if self.fine_grid < 5:
            raise InvalidArgumentError(f"fine_grid must be >= 5, got {self.fine_grid}")


@dataclass(frozen=True)
class IntegroDiffDemo(PdeSpec):
    """u_t = nu u_xx + gamma * mean(u)"""

    kind = "integro_differential"
    nu: float = 0.1
    gamma: float = -0.5

    def __post_init__(self):
        if self.nu < 0:
            raise InvalidArgumentError(f"nu must be non-negative, got {self.nu}")


PDE_KINDS = {
    cls.kind: cls
    for cls in (AdvectionDiffusion1D, FourthOrder, ViscousBurgers, InviscidBurgers,
                WaveSystem, AdvDiff2D, IntegroDiffDemo)
}


def pde_from_dict(data: Dict[str, Any]) -> PdeSpec:
    """
    Build a PDE spec from its config section

    Args:
        data: {"kind": ..., **parameters}; advection_diffusion_1d also accepts
            "coefficients": "reference" or explicit "alpha"/"kappa" series

    Returns:
        PdeSpec instance
    """
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError("PDE config needs a 'kind'")
    kind = data["kind"]
    if kind not in PDE_KINDS:
        raise ConfigError(f"Unknown PDE kind '{kind}' (known: {sorted(PDE_KINDS)})")
    cls = PDE_KINDS[kind]
    params = {k: v for k, v in data.items() if k != "kind"}

    allowed = {f.name for f in fields(cls)}
    if cls is AdvectionDiffusion1D:
        allowed.add("coefficients")
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"Unknown keys in PDE '{kind}': {sorted(unknown)}")

    try:
        if cls is AdvectionDiffusion1D:
            coefficients = params.pop("coefficients", None)
            if coefficients == "reference":
                params["alpha"], params["kappa"] = load_reference_coefficients()
            elif coefficients is not None:
                raise ConfigError(f"Unknown coefficient set '{coefficients}'")
            for name in ("alpha", "kappa"):
                if isinstance(params.get(name), dict):
                    params[name] = FixedFourierSeries.from_dict(params[name])
        return cls(**params)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
