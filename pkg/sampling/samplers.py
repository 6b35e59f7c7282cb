from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.types import GridSet, NodalState
from sampling.fields import (
    ConstantField,
    FourierSeriesField,
    InitialField,
    PiecewiseConstantField,
    SineSeries2DField,
    StackedField,
)
from sampling.rng import Rng
from utils.errors import ConfigError, InvalidArgumentError


@dataclass(frozen=True)
class FourierCoeffSpec:
    """
    Distribution of the coefficients of a random finite Fourier series.

    a0 ~ U[a0_low, a0_high]; a_n, b_n ~ U[-scale/n^decay, scale/n^decay].
    When n_modes_range is set, N_c ~ U{lo..hi} is drawn first.
    """

    n_modes: int = 10
    a0_low: float = 0.0
    a0_high: float = 0.0
    coeff_scale: float = 1.0
    coeff_decay: float = 0.0
    n_modes_range: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.n_modes < 0:
            raise InvalidArgumentError(f"n_modes must be >= 0, got {self.n_modes}")
        values = (self.a0_low, self.a0_high, self.coeff_scale, self.coeff_decay)
        if not all(np.isfinite(values)):
            raise InvalidArgumentError("Fourier coefficient bounds must be finite")
        if self.a0_low > self.a0_high:
            raise InvalidArgumentError("a0_low must not exceed a0_high")
        if self.coeff_scale < 0:
            raise InvalidArgumentError("coeff_scale must be non-negative")
        if self.n_modes_range is not None:
            lo, hi = self.n_modes_range
            if not 0 <= lo <= hi:
                raise InvalidArgumentError(f"Invalid n_modes_range {self.n_modes_range}")

    @classmethod
    def advection_diffusion(cls) -> "FourierCoeffSpec":
        """a0 = 0, a_n, b_n ~ U[-1, 1], N_c ~ U{1..10}"""
        return cls(n_modes=10, coeff_scale=1.0, coeff_decay=0.0, n_modes_range=(1, 10))

    @classmethod
    def burgers(cls, n_modes: int = 10) -> "FourierCoeffSpec":
        """a0 ~ U[-1/2, 1/2], a_n, b_n ~ U[-1/n, 1/n]"""
        return cls(n_modes=n_modes, a0_low=-0.5, a0_high=0.5, coeff_scale=1.0, coeff_decay=1.0)

    def bounds(self, n_modes: int) -> np.ndarray:
        n = np.arange(1, n_modes + 1, dtype=np.float64)
        return self.coeff_scale / n ** self.coeff_decay


class Sampler:
    """Draws initial-condition fields from an rng"""

    n_components = 1
    dim = 1

    def draw(self, rng: Rng) -> InitialField:
        raise NotImplementedError

    def sample(self, grid: GridSet, rng: Rng) -> NodalState:
        return self.draw(rng).on_grid(grid)


class FourierSampler(Sampler):

    def __init__(self, spec: FourierCoeffSpec):
        self.spec = spec

    def draw(self, rng: Rng) -> FourierSeriesField:
        spec = self.spec
        n_modes = spec.n_modes
        if spec.n_modes_range is not None:
            n_modes = int(rng.integers(spec.n_modes_range[0], spec.n_modes_range[1] + 1))
        a0 = rng.uniform(spec.a0_low, spec.a0_high)
        bound = spec.bounds(n_modes)
        a = rng.uniform(-bound, bound)
        b = rng.uniform(-bound, bound)
        return FourierSeriesField(a0, a, b)


class PiecewiseConstantSampler(Sampler):
    """u1, u2 ~ U[-1, 1]; x_left, x_right ~ U[-pi, pi], swapped into order"""

    def draw(self, rng: Rng) -> PiecewiseConstantField:
        u1, u2 = rng.uniform(-1.0, 1.0, size=2)
        x_left, x_right = rng.uniform(-np.pi, np.pi, size=2)
        if x_left > x_right:
            x_left, x_right = x_right, x_left
        return PiecewiseConstantField(u1, u2, x_left, x_right)


class Sine2DSampler(Sampler):
    """c_kl ~ U[-1, 1] / (k + l), k, l = 1..N_c"""

    dim = 2

    def __init__(self, n_modes: int = 7):
        if n_modes < 1:
            raise InvalidArgumentError(f"n_modes must be >= 1, got {n_modes}")
        self.n_modes = n_modes

    def draw(self, rng: Rng) -> SineSeries2DField:
        k = np.arange(1, self.n_modes + 1, dtype=np.float64)
        weights = 1.0 / (k[:, None] + k[None, :])
        return SineSeries2DField(rng.uniform(-1.0, 1.0, size=(self.n_modes, self.n_modes)) * weights)


class ConstantSampler(Sampler):

    def __init__(self, value: float, dim: int = 1):
        self.value = float(value)
        self.dim = dim

    def draw(self, rng: Rng) -> ConstantField:
        return ConstantField(self.value, self.dim)


class ComponentSampler(Sampler):
    """Independent draws per PDE component, stacked component-major"""

    def __init__(self, samplers: List[Sampler]):
        if not samplers:
            raise InvalidArgumentError("ComponentSampler needs at least one sampler")
        self.samplers = list(samplers)
        self.dim = samplers[0].dim
        self.n_components = sum(s.n_components for s in samplers)

    def draw(self, rng: Rng) -> StackedField:
        return StackedField([s.draw(rng) for s in self.samplers])


class MixtureSampler(Sampler):
    """
    Blocks of trajectory indices per component sampler.

    Trajectory j of M is drawn by the sampler whose block contains j; block
    sizes are the rounded cumulative weights.
    """

    def __init__(self, components: Sequence[Tuple[float, Sampler]]):
        if not components:
            raise InvalidArgumentError("MixtureSampler needs at least one component")
        weights = np.array([w for w, _ in components], dtype=np.float64)
        if np.any(weights < 0) or weights.sum() <= 0:
            raise InvalidArgumentError("Mixture weights must be non-negative with a positive sum")
        self.weights = weights / weights.sum()
        self.samplers = [s for _, s in components]
        self.dim = self.samplers[0].dim
        self.n_components = self.samplers[0].n_components

    def sampler_for(self, index: int, total: int) -> Sampler:
        edges = np.rint(np.cumsum(self.weights) * total).astype(int)
        for edge, sampler in zip(edges, self.samplers):
            if index < edge:
                return sampler
        return self.samplers[-1]

    def draw(self, rng: Rng) -> InitialField:
        return self.samplers[0].draw(rng)

    def draw_indexed(self, rng: Rng, index: int, total: int) -> InitialField:
        return self.sampler_for(index, total).draw(rng)


def draw_for_trajectory(sampler: Sampler, rng: Rng, index: int, total: int) -> InitialField:
    if isinstance(sampler, MixtureSampler):
        return sampler.draw_indexed(rng, index, total)
    return sampler.draw(rng)


def sample_fourier_ic(spec: FourierCoeffSpec, grid: GridSet, rng: Rng) -> NodalState:
    if grid.dim != 1:
        raise InvalidArgumentError("sample_fourier_ic needs a 1D grid")
    return FourierSampler(spec).sample(grid, rng)


def sample_piecewise_constant_ic(grid: GridSet, rng: Rng) -> NodalState:
    if grid.dim != 1 or grid.domain.kind != "periodic":
        raise InvalidArgumentError("sample_piecewise_constant_ic needs a 1D periodic grid")
    return PiecewiseConstantSampler().sample(grid, rng)


def sample_2d_sine_ic(n_modes: int, grid: GridSet, rng: Rng) -> NodalState:
    if grid.dim != 2:
        raise InvalidArgumentError("sample_2d_sine_ic needs a 2D grid")
    return Sine2DSampler(n_modes).sample(grid, rng)


_SAMPLER_KEYS = {
    "fourier": {"kind", "n_modes", "a0_low", "a0_high", "coeff_scale", "coeff_decay", "n_modes_range", "preset"},
    "piecewise_constant": {"kind"},
    "sine_2d": {"kind", "n_modes"},
    "constant": {"kind", "value", "dim"},
    "components": {"kind", "components"},
    "mixture": {"kind", "components"},
}


def build_sampler(config: Dict[str, Any]) -> Sampler:
    """
    Build a sampler from its experiment-config section

    Args:
        config: Dictionary with a "kind" key and kind-specific fields

    Returns:
        Sampler instance
    """
    if not isinstance(config, dict) or "kind" not in config:
        raise ConfigError("Sampler config needs a 'kind'")
    kind = config["kind"]
    if kind not in _SAMPLER_KEYS:
        raise ConfigError(f"Unknown sampler kind '{kind}'")
    unknown = set(config) - _SAMPLER_KEYS[kind]
    if unknown:
        raise ConfigError(f"Unknown keys in sampler '{kind}': {sorted(unknown)}")

    if kind == "fourier":
        preset = config.get("preset")
        if preset == "advection_diffusion":
            base = FourierCoeffSpec.advection_diffusion()
        elif preset == "burgers":
            base = FourierCoeffSpec.burgers(int(config.get("n_modes", 10)))
        elif preset is None:
            base = FourierCoeffSpec()
        else:
            raise ConfigError(f"Unknown Fourier preset '{preset}'")
        overrides = {k: v for k, v in config.items() if k not in ("kind", "preset")}
        if "n_modes_range" in overrides and overrides["n_modes_range"] is not None:
            overrides["n_modes_range"] = tuple(overrides["n_modes_range"])
        try:
            return FourierSampler(replace(base, **overrides))
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "piecewise_constant":
        return PiecewiseConstantSampler()
    if kind == "sine_2d":
        return Sine2DSampler(int(config.get("n_modes", 7)))
    if kind == "constant":
        return ConstantSampler(float(config.get("value", 0.0)), int(config.get("dim", 1)))
    if kind == "components":
        return ComponentSampler([build_sampler(c) for c in config["components"]])

    # mixture
    components = []
    for entry in config["components"]:
        if set(entry) - {"weight", "sampler"}:
            raise ConfigError(f"Unknown keys in mixture entry: {sorted(set(entry) - {'weight', 'sampler'})}")
        components.append((float(entry["weight"]), build_sampler(entry["sampler"])))
    return MixtureSampler(components)
