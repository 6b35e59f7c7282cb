"""
Scattered 2D nodes on [-1, 1]^2 and the closed-form 2D validation field.
"""

import math
import warnings

import numpy as np
from scipy.stats import qmc

from config import Config
from core.types import Domain, GridSet, NodalState
from sampling.fields import Gaussian2DField
from sampling.rng import Rng
from utils.errors import InvalidArgumentError


def sobol_2d(count: int, skip: int = Config.SOBOL_SKIP) -> np.ndarray:
    """
    Unscrambled 2D Sobol points

    Args:
        count: Number of points (>= 1)
        skip: Leading points dropped (index 0 is the all-zeros point)

    Returns:
        (count, 2) array in [0, 1)^2
    """
    if count < 1:
        raise InvalidArgumentError(f"count must be >= 1, got {count}")
    if skip < 0:
        raise InvalidArgumentError(f"skip must be >= 0, got {skip}")
    engine = qmc.Sobol(d=2, scramble=False)
    if skip:
        engine.fast_forward(skip)
    with warnings.catch_warnings():
        # balance warning for counts that are not powers of two
        warnings.simplefilter("ignore", UserWarning)
        return engine.random(count)


def make_2d_unstructured_grid(rng: Rng, n_interior: int = 200, n_per_edge: int = 8,
                              skip: int = Config.SOBOL_SKIP) -> GridSet:
    """
    Interior Sobol nodes, random edge nodes and the 4 corners, all cosine-mapped

    Args:
        rng: Stream for the edge nodes
        n_interior: Interior node count (200 by default)
        n_per_edge: Nodes per edge (8 by default)
        skip: Sobol points skipped

    Returns:
        GridSet with n_interior + 4*n_per_edge + 4 nodes (236 by default)
    """
    interior = np.cos(math.pi * sobol_2d(n_interior, skip))

    def edge_coordinates() -> np.ndarray:
        return np.cos(rng.uniform(0.0, math.pi, size=n_per_edge))

    bottom = np.column_stack([edge_coordinates(), np.full(n_per_edge, -1.0)])
    top = np.column_stack([edge_coordinates(), np.full(n_per_edge, 1.0)])
    left = np.column_stack([np.full(n_per_edge, -1.0), edge_coordinates()])
    right = np.column_stack([np.full(n_per_edge, 1.0), edge_coordinates()])
    corners = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])

    nodes = np.vstack([interior, bottom, top, left, right, corners])
    return GridSet(nodes=nodes, permutation=np.arange(nodes.shape[0]), domain=Domain.box())


def boundary_mask(grid: GridSet) -> np.ndarray:
    """Nodes lying on the boundary of the box"""
    lower = np.asarray(grid.domain.lower)
    upper = np.asarray(grid.domain.upper)
    return np.any((grid.nodes == lower) | (grid.nodes == upper), axis=1)


def gaussian_2d_ic(amplitude: float, mu_x: float, mu_y: float, sigma_x: float, sigma_y: float,
                   grid: GridSet) -> NodalState:
    if grid.dim != 2:
        raise InvalidArgumentError("gaussian_2d_ic needs a 2D grid")
    return Gaussian2DField(amplitude, mu_x, mu_y, sigma_x, sigma_y).on_grid(grid)
