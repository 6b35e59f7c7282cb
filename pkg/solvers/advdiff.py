"""
Crank-Nicolson stepper for 1D variable-coefficient advection-diffusion.

The spatial operator L = -D P A + D P K D is assembled from the dense
spectral differentiation matrix D, the 2/3-rule filter P and the diagonal
coefficient matrices A = diag(alpha), K = diag(kappa). Each (spec, grid, dt)
gets one LU factorization, kept in a process-wide cache.
"""

import logging
import threading
from typing import Dict, Tuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from config import Config
from core.types import GridSet, NodalState
from solvers.pde import AdvectionDiffusion1D
from solvers.spectral import SpectralOperator1D
from utils.errors import NumericalError

logger = logging.getLogger(__name__)

_FACTOR_CACHE: Dict[Tuple, Tuple[Tuple[np.ndarray, np.ndarray], np.ndarray]] = {}
_FACTOR_LOCK = threading.Lock()


def advdiff_operator(spec: AdvectionDiffusion1D, operator: SpectralOperator1D,
                     x: np.ndarray) -> np.ndarray:
    """Dense L with u_t = L u"""
    spec.check_grid_nodes(x)
    d1 = operator.differentiation_matrix(1)
    if Config.DEALIAS:
        filtered = operator.dealias_matrix()
    else:
        filtered = np.eye(operator.n_nodes)
    alpha = spec.alpha.evaluate(x)
    kappa = spec.kappa.evaluate(x)
    advection = -(d1 @ filtered) * alpha[None, :]
    diffusion = (d1 @ filtered) @ (kappa[:, None] * d1)
    return advection + diffusion


def _factors(spec: AdvectionDiffusion1D, grid: GridSet, dt: float):
    key = (spec, grid.n_nodes, grid.domain.lower[0], grid.domain.length, float(dt))
    with _FACTOR_LOCK:
        cached = _FACTOR_CACHE.get(key)
        if cached is not None:
            return cached
        operator = SpectralOperator1D.for_grid(grid)
        op = advdiff_operator(spec, operator, grid.nodes[:, 0])
        identity = np.eye(grid.n_nodes)
        lhs = identity - 0.5 * dt * op
        rhs = identity + 0.5 * dt * op
        condition = np.linalg.cond(lhs)
        if not np.isfinite(condition) or condition > Config.CN_CONDITION_LIMIT:
            raise NumericalError(
                f"Crank-Nicolson system is singular or ill-conditioned (condition number {condition:.3e})"
            )
        entry = (lu_factor(lhs), rhs)
        _FACTOR_CACHE[key] = entry
        logger.debug(f"CN factorization cached: N={grid.n_nodes}, dt={dt}, cond={condition:.3e}")
        return entry


def clear_factor_cache():
    with _FACTOR_LOCK:
        _FACTOR_CACHE.clear()


def advdiff_cn_values(values: np.ndarray, spec: AdvectionDiffusion1D, grid: GridSet,
                      dt: float) -> np.ndarray:
    factors, rhs = _factors(spec, grid, dt)
    return lu_solve(factors, rhs @ values)


def advdiff1d_step_cn(state: NodalState, spec: AdvectionDiffusion1D, dt: float,
                      grid: GridSet) -> NodalState:
    """
    One Crank-Nicolson step (I - dt/2 L) u^{k+1} = (I + dt/2 L) u^k

    Args:
        state: Scalar state on grid
        spec: Coefficient series alpha(x), kappa(x)
        dt: Step size
        grid: Uniform periodic grid with even N

    Returns:
        State at time + dt
    """
    values = advdiff_cn_values(state.values, spec, grid, dt)
    if not np.all(np.isfinite(values)):
        raise NumericalError("Crank-Nicolson step produced non-finite values")
    return NodalState(values, time=state.time + dt)
