"""
Fourier collocation on uniform periodic grids.

Wavenumbers follow numpy's FFT ordering and are scaled to the period of the
domain (integer wavenumbers on a 2*pi interval).
"""

import math
from functools import lru_cache

import numpy as np

from core.types import GridSet, NodalState
from utils.errors import InvalidArgumentError


class SpectralOperator1D:
    """Spectral differentiation, filtering and interpolation for N uniform nodes"""

    def __init__(self, n_nodes: int, length: float = 2.0 * math.pi, origin: float = 0.0):
        if n_nodes < 2 or n_nodes % 2:
            raise InvalidArgumentError(f"Spectral operators need an even N >= 2, got {n_nodes}")
        self.n_nodes = n_nodes
        self.length = float(length)
        self.origin = float(origin)
        self.scale = 2.0 * math.pi / self.length
        # integer wavenumbers -N/2..N/2-1 in FFT order
        self.modes = np.fft.fftfreq(n_nodes, d=1.0 / n_nodes)
        self.wavenumbers = self.modes * self.scale
        self.nyquist = n_nodes // 2

    @classmethod
    def for_grid(cls, grid: GridSet) -> "SpectralOperator1D":
        require_uniform_periodic(grid)
        return _cached_operator(grid.n_nodes, grid.domain.length, grid.domain.lower[0])

    def forward(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fft(values, axis=-1)

    def inverse(self, coefficients: np.ndarray) -> np.ndarray:
        return np.fft.ifft(coefficients, axis=-1).real

    def symbol(self, order: int) -> np.ndarray:
        """(ik)^order with the Nyquist mode zeroed for odd orders"""
        multiplier = (1j * self.wavenumbers) ** order
        if order % 2:
            multiplier[self.nyquist] = 0.0
        return multiplier

    def derivative(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        if order < 0:
            raise InvalidArgumentError(f"Derivative order must be >= 0, got {order}")
        if order == 0:
            return np.array(values, dtype=np.float64, copy=True)
        return self.inverse(self.symbol(order) * self.forward(values))

    def differentiation_matrix(self, order: int = 1) -> np.ndarray:
        """Dense D with D @ u equal to derivative(u, order)"""
        return self.derivative(np.eye(self.n_nodes), order).T

    def dealias_mask(self) -> np.ndarray:
        """2/3 rule: keep |k| < N/3"""
        return np.abs(self.modes) < self.n_nodes / 3.0

    def dealias(self, values: np.ndarray) -> np.ndarray:
        return self.inverse(self.forward(values) * self.dealias_mask())

    def dealias_matrix(self) -> np.ndarray:
        return self.dealias(np.eye(self.n_nodes)).T

    def interpolate(self, values: np.ndarray, x: np.ndarray) -> np.ndarray:
        """
        Evaluate the trigonometric interpolant at arbitrary points

        Args:
            values: (..., N) nodal values
            x: (n,) coordinates

        Returns:
            (..., n) interpolated values
        """
        coefficients = self.forward(values) / self.n_nodes
        # split the Nyquist mode evenly between +N/2 and -N/2
        coefficients[..., self.nyquist] *= 0.5
        phase = np.exp(1j * np.outer(np.asarray(x) - self.origin, self.wavenumbers))
        nyquist_phase = np.exp(1j * (np.asarray(x) - self.origin) * self.nyquist * self.scale)
        result = coefficients @ phase.T
        result = result + coefficients[..., self.nyquist:self.nyquist + 1] * nyquist_phase
        return result.real


@lru_cache(maxsize=32)
def _cached_operator(n_nodes: int, length: float, origin: float) -> SpectralOperator1D:
    return SpectralOperator1D(n_nodes, length, origin)


def require_uniform_periodic(grid: GridSet):
    if grid.dim != 1 or not grid.is_uniform_periodic:
        raise InvalidArgumentError(
            "Spectral operations need an identity-ordered uniform periodic 1D grid"
        )
    if grid.n_nodes % 2:
        raise InvalidArgumentError(f"Spectral operations need an even N, got {grid.n_nodes}")


def spectral_derivative(state: NodalState, grid: GridSet, order: int = 1) -> NodalState:
    """
    m-th spectral derivative of every component

    Args:
        state: State over grid
        grid: Uniform periodic grid with even N
        order: Derivative order m

    Returns:
        NodalState of the derivative
    """
    operator = SpectralOperator1D.for_grid(grid)
    values = state.values.reshape(state.n_components, state.n_nodes)
    derivative = operator.derivative(values, order)
    return NodalState(derivative.ravel(), time=state.time, n_components=state.n_components)
