"""
Burgers oracles.

Viscous: Fourier collocation with 2/3-rule dealiasing of u*u_x, classical RK4.
Inviscid: finite-volume WENO5 reconstruction, local Lax-Friedrichs flux for
f(u) = u^2/2 and TVD-RK3 in time. WENO5 stands in for the 9th-order scheme
of the original experiments; shock profiles differ at O(h^5).
"""

import math

import numpy as np

from config import Config
from core.types import GridSet, NodalState
from solvers.spectral import SpectralOperator1D, require_uniform_periodic
from utils.errors import InvalidArgumentError, NumericalError

WENO_EPSILON = 1e-6
_LINEAR_WEIGHTS = (0.1, 0.6, 0.3)


def _check_finite(values: np.ndarray, name: str):
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"{name} produced non-finite values")


def viscous_rhs(values: np.ndarray, operator: SpectralOperator1D, nu: float) -> np.ndarray:
    ux = operator.derivative(values, 1)
    product = values * ux
    if Config.DEALIAS:
        product = operator.dealias(product)
    return -product + nu * operator.derivative(values, 2)


def viscous_burgers_values(values: np.ndarray, operator: SpectralOperator1D, nu: float,
                           dt: float) -> np.ndarray:
    k1 = viscous_rhs(values, operator, nu)
    k2 = viscous_rhs(values + 0.5 * dt * k1, operator, nu)
    k3 = viscous_rhs(values + 0.5 * dt * k2, operator, nu)
    k4 = viscous_rhs(values + dt * k3, operator, nu)
    out = values + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(out, "Viscous Burgers step")
    return out


def viscous_burgers_step(state: NodalState, nu: float, dt: float, grid: GridSet) -> NodalState:
    """One RK4 step of u_t = -u u_x + nu u_xx"""
    if nu < 0:
        raise InvalidArgumentError(f"nu must be non-negative, got {nu}")
    _check_finite(state.values, "Viscous Burgers input")
    operator = SpectralOperator1D.for_grid(grid)
    return NodalState(viscous_burgers_values(state.values, operator, nu, dt), time=state.time + dt)


def _weno5_left(v: np.ndarray) -> np.ndarray:
    """Left-biased WENO5 value at interface i+1/2 for every i (periodic)"""
    vm2, vm1, v0 = np.roll(v, 2), np.roll(v, 1), v
    vp1, vp2 = np.roll(v, -1), np.roll(v, -2)

    q0 = (2.0 * vm2 - 7.0 * vm1 + 11.0 * v0) / 6.0
    q1 = (-vm1 + 5.0 * v0 + 2.0 * vp1) / 6.0
    q2 = (2.0 * v0 + 5.0 * vp1 - vp2) / 6.0

    b0 = 13.0 / 12.0 * (vm2 - 2.0 * vm1 + v0) ** 2 + 0.25 * (vm2 - 4.0 * vm1 + 3.0 * v0) ** 2
    b1 = 13.0 / 12.0 * (vm1 - 2.0 * v0 + vp1) ** 2 + 0.25 * (vm1 - vp1) ** 2
    b2 = 13.0 / 12.0 * (v0 - 2.0 * vp1 + vp2) ** 2 + 0.25 * (3.0 * v0 - 4.0 * vp1 + vp2) ** 2

    a0 = _LINEAR_WEIGHTS[0] / (WENO_EPSILON + b0) ** 2
    a1 = _LINEAR_WEIGHTS[1] / (WENO_EPSILON + b1) ** 2
    a2 = _LINEAR_WEIGHTS[2] / (WENO_EPSILON + b2) ** 2
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)


def _interface_flux(values: np.ndarray) -> np.ndarray:
    """Local Lax-Friedrichs flux F_{i+1/2}"""
    left = _weno5_left(values)
    # mirrored reconstruction gives the right state at i-1/2; shift to i+1/2
    right = np.roll(_weno5_left(values[::-1])[::-1], -1)
    speed = np.maximum(np.abs(left), np.abs(right))
    return 0.25 * (left ** 2 + right ** 2) - 0.5 * speed * (right - left)


def weno_rhs(values: np.ndarray, h: float) -> np.ndarray:
    flux = _interface_flux(values)
    return -(flux - np.roll(flux, 1)) / h


def cfl_number(values: np.ndarray, dt: float, h: float) -> float:
    return float(dt * np.max(np.abs(values)) / h)


def weno_substeps(values: np.ndarray, dt: float, h: float, cfl: float = Config.WENO_CFL) -> int:
    """Sub-steps needed so each stays within the CFL limit"""
    return max(1, math.ceil(cfl_number(values, dt, h) / cfl - 1e-12))


def inviscid_burgers_values(values: np.ndarray, dt: float, h: float,
                            cfl: float = Config.WENO_CFL) -> np.ndarray:
    number = cfl_number(values, dt, h)
    if number > cfl:
        raise InvalidArgumentError(f"CFL number {number:.4f} exceeds the limit {cfl}")
    stage1 = values + dt * weno_rhs(values, h)
    stage2 = 0.75 * values + 0.25 * (stage1 + dt * weno_rhs(stage1, h))
    out = values / 3.0 + 2.0 / 3.0 * (stage2 + dt * weno_rhs(stage2, h))
    _check_finite(out, "Inviscid Burgers step")
    return out


def inviscid_burgers_step(state: NodalState, dt: float, grid: GridSet,
                          cfl: float = Config.WENO_CFL) -> NodalState:
    """
    One TVD-RK3 step of u_t + (u^2/2)_x = 0

    Args:
        state: Scalar state on grid
        dt: Step size; dt * max|u| / h must not exceed cfl
        grid: Uniform periodic grid
        cfl: CFL limit

    Returns:
        State at time + dt
    """
    require_uniform_periodic(grid)
    _check_finite(state.values, "Inviscid Burgers input")
    h = grid.domain.length / grid.n_nodes
    return NodalState(inviscid_burgers_values(state.values, dt, h, cfl), time=state.time + dt)
