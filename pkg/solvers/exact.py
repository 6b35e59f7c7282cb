"""
Exact Fourier-space integrators: fourth-order diffusion, the 2x2 wave system
and the integro-differential demo equation.
"""

from typing import Tuple

import numpy as np

from core.types import GridSet, NodalState
from solvers.spectral import SpectralOperator1D
from utils.errors import DimensionError, InvalidArgumentError


def fourth_order_factor(operator: SpectralOperator1D, c: float, dt: float) -> np.ndarray:
    return np.exp(-c * operator.wavenumbers ** 4 * dt)


def fourth_order_values(values: np.ndarray, operator: SpectralOperator1D, c: float,
                        dt: float) -> np.ndarray:
    return operator.inverse(fourth_order_factor(operator, c, dt) * operator.forward(values))


def fourth_order_exact_step(state: NodalState, c: float, dt: float, grid: GridSet) -> NodalState:
    """Every mode n multiplied by exp(-c n^4 dt)"""
    if not c > 0:
        raise InvalidArgumentError(f"c must be positive, got {c}")
    operator = SpectralOperator1D.for_grid(grid)
    return NodalState(fourth_order_values(state.values, operator, c, dt), time=state.time + dt)


def wave_values(u1: np.ndarray, u2: np.ndarray, operator: SpectralOperator1D,
                t: float) -> Tuple[np.ndarray, np.ndarray]:
    # w+ = u1 + u2 solves w_t = w_x, so w+(x, t) = w+(x + t, 0); w- moves the other way
    plus = operator.forward(u1 + u2) * np.exp(1j * operator.wavenumbers * t)
    minus = operator.forward(u1 - u2) * np.exp(-1j * operator.wavenumbers * t)
    w_plus = operator.inverse(plus)
    w_minus = operator.inverse(minus)
    return 0.5 * (w_plus + w_minus), 0.5 * (w_plus - w_minus)


def wave_system_exact(u1: NodalState, u2: NodalState, t: float,
                      grid: GridSet) -> Tuple[NodalState, NodalState]:
    """
    Exact solution of u_t = A u_x with A = [[0, 1], [1, 0]]

    Args:
        u1: First component at time 0
        u2: Second component at time 0
        t: Elapsed time
        grid: Uniform periodic grid with even N

    Returns:
        (u1, u2) at time u1.time + t
    """
    if u1.values.shape != u2.values.shape:
        raise DimensionError("Wave components must have the same length")
    operator = SpectralOperator1D.for_grid(grid)
    v1, v2 = wave_values(u1.values, u2.values, operator, t)
    time = u1.time + t
    return NodalState(v1, time=time), NodalState(v2, time=time)


def integro_factor(operator: SpectralOperator1D, nu: float, gamma: float, dt: float) -> np.ndarray:
    factor = np.exp(-nu * operator.wavenumbers ** 2 * dt)
    factor[0] = np.exp(gamma * dt)
    return factor


def integro_values(values: np.ndarray, operator: SpectralOperator1D, nu: float, gamma: float,
                   dt: float) -> np.ndarray:
    return operator.inverse(integro_factor(operator, nu, gamma, dt) * operator.forward(values))


def integro_differential_step(state: NodalState, nu: float, gamma: float, dt: float,
                              grid: GridSet) -> NodalState:
    """
    Exact step of u_t = nu u_xx + gamma * mean(u)

    The mean mode grows by exp(gamma dt); mode n != 0 decays by exp(-nu n^2 dt).
    """
    if nu < 0:
        raise InvalidArgumentError(f"nu must be non-negative, got {nu}")
    operator = SpectralOperator1D.for_grid(grid)
    return NodalState(integro_values(state.values, operator, nu, gamma, dt), time=state.time + dt)
