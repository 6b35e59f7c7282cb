"""
Initial-condition fields.

A field is a pure function of node coordinates with its drawn coefficients
attached. Samplers draw fields; evaluating a field on a grid gives the nodal
initial state. Reference solvers that work on their own internal grids
evaluate the same field there.
"""

import math
from typing import Any, Callable, Dict, List, Sequence

import numpy as np

from core.types import GridSet, NodalState
from utils.errors import DimensionError, InvalidArgumentError


def evaluate_fourier_series(a0: float, a: Sequence[float], b: Sequence[float], x):
    """
    Evaluate a0 + sum_n (a_n cos(nx) + b_n sin(nx))

    Args:
        a0: Constant term
        a: Cosine coefficients a_1..a_Nc
        b: Sine coefficients b_1..b_Nc
        x: Scalar or array of points

    Returns:
        Series value(s), same shape as x
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"Coefficient lengths differ: {a.shape} vs {b.shape}")
    x = np.asarray(x, dtype=np.float64)
    if a.size == 0:
        return a0 + np.zeros_like(x)
    n = np.arange(1, a.size + 1, dtype=np.float64)
    phase = x[..., None] * n
    return a0 + np.sum(a * np.cos(phase) + b * np.sin(phase), axis=-1)


class InitialField:
    """Base class of initial-condition fields"""

    n_components = 1
    dim = 1

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at (n, d) points, shape (n_components, n)"""
        raise NotImplementedError

    def describe(self) -> Dict[str, Any]:
        return {"kind": type(self).__name__}

    def on_grid(self, grid: GridSet, time: float = 0.0) -> NodalState:
        if grid.dim != self.dim:
            raise InvalidArgumentError(
                f"{type(self).__name__} is a {self.dim}D field, grid is {grid.dim}D"
            )
        values = self.evaluate(grid.nodes)
        return NodalState(values.ravel(), time=time, n_components=self.n_components)


class FourierSeriesField(InitialField):

    def __init__(self, a0: float, a: Sequence[float], b: Sequence[float]):
        self.a0 = float(a0)
        self.a = np.asarray(a, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)

    def evaluate(self, points):
        x = np.asarray(points, dtype=np.float64).reshape(-1, 1)[:, 0]
        return evaluate_fourier_series(self.a0, self.a, self.b, x)[None, :]

    def describe(self):
        return {"kind": "fourier", "a0": self.a0, "a": self.a.tolist(), "b": self.b.tolist()}


class PiecewiseConstantField(InitialField):
    """u1 on [x_left, x_right], u2 elsewhere; coordinates taken modulo 2*pi into [-pi, pi)"""

    def __init__(self, u1: float, u2: float, x_left: float, x_right: float):
        self.u1, self.u2 = float(u1), float(u2)
        self.x_left, self.x_right = float(x_left), float(x_right)

    def evaluate(self, points):
        x = np.asarray(points, dtype=np.float64).reshape(-1, 1)[:, 0]
        shifted = np.mod(x + math.pi, 2.0 * math.pi) - math.pi
        inside = (shifted >= self.x_left) & (shifted <= self.x_right)
        return np.where(inside, self.u1, self.u2)[None, :]

    def describe(self):
        return {"kind": "piecewise_constant", "u1": self.u1, "u2": self.u2,
                "x_left": self.x_left, "x_right": self.x_right}


class SineSeries2DField(InitialField):
    """sum_kl c_kl sin(k*pi/2*(x+1)) sin(l*pi/2*(y+1)); zero on the boundary of [-1,1]^2"""

    dim = 2

    def __init__(self, coefficients: np.ndarray):
        self.coefficients = np.asarray(coefficients, dtype=np.float64)

    def evaluate(self, points):
        points = np.asarray(points, dtype=np.float64)
        n_modes = self.coefficients.shape[0]
        k = np.arange(1, n_modes + 1, dtype=np.float64)
        sx = np.sin(np.outer(points[:, 0] + 1.0, k) * (math.pi / 2.0))
        sy = np.sin(np.outer(points[:, 1] + 1.0, k) * (math.pi / 2.0))
        return np.sum((sx @ self.coefficients) * sy, axis=1)[None, :]

    def describe(self):
        return {"kind": "sine_2d", "coefficients": self.coefficients.tolist()}


class Gaussian2DField(InitialField):

    dim = 2

    def __init__(self, amplitude: float = 0.2, mu_x: float = 0.2, mu_y: float = 0.2,
                 sigma_x: float = 0.18, sigma_y: float = 0.18):
        if not (sigma_x > 0 and sigma_y > 0):
            raise InvalidArgumentError("Gaussian widths must be positive")
        self.amplitude = float(amplitude)
        self.mu_x, self.mu_y = float(mu_x), float(mu_y)
        self.sigma_x, self.sigma_y = float(sigma_x), float(sigma_y)

    def evaluate(self, points):
        points = np.asarray(points, dtype=np.float64)
        scale = self.amplitude / math.sqrt(4.0 * math.pi ** 2 * self.sigma_x ** 2 * self.sigma_y ** 2)
        exponent = (
            -0.5 * (points[:, 0] - self.mu_x) ** 2 / self.sigma_x ** 2
            - 0.5 * (points[:, 1] - self.mu_y) ** 2 / self.sigma_y ** 2
        )
        return (scale * np.exp(exponent))[None, :]

    def describe(self):
        return {"kind": "gaussian_2d", "amplitude": self.amplitude, "mu_x": self.mu_x,
                "mu_y": self.mu_y, "sigma_x": self.sigma_x, "sigma_y": self.sigma_y}


class ConstantField(InitialField):

    def __init__(self, value: float, dim: int = 1):
        self.value = float(value)
        self.dim = dim

    def evaluate(self, points):
        n = np.asarray(points).reshape(-1, self.dim).shape[0]
        return np.full((1, n), self.value)

    def describe(self):
        return {"kind": "constant", "value": self.value}


class FunctionField(InitialField):
    """Closed-form field given by a name and a vectorized function of x"""

    def __init__(self, name: str, func: Callable[[np.ndarray], np.ndarray], dim: int = 1):
        self.name = name
        self.func = func
        self.dim = dim

    def evaluate(self, points):
        points = np.asarray(points, dtype=np.float64).reshape(-1, self.dim)
        arg = points[:, 0] if self.dim == 1 else points
        return np.asarray(self.func(arg), dtype=np.float64).reshape(1, -1)

    def describe(self):
        return {"kind": "named", "name": self.name}


class StackedField(InitialField):
    """Component-major stack of fields, one block per PDE component"""

    def __init__(self, fields: List[InitialField]):
        if not fields:
            raise InvalidArgumentError("StackedField needs at least one field")
        dims = {f.dim for f in fields}
        if len(dims) != 1:
            raise DimensionError("All stacked fields must share a dimension")
        self.fields = list(fields)
        self.dim = dims.pop()
        self.n_components = sum(f.n_components for f in fields)

    def evaluate(self, points):
        return np.concatenate([f.evaluate(points) for f in self.fields], axis=0)

    def describe(self):
        return {"kind": "stacked", "components": [f.describe() for f in self.fields]}
