import math
import numpy as np

from core.types import Domain, GridSet
from sampling.rng import make_rng
from utils.errors import InvalidArgumentError


def make_uniform_periodic_grid(n_nodes: int, domain_length: float = 2.0 * math.pi,
                               origin: float = 0.0) -> GridSet:
    """
    Uniform periodic 1D grid, endpoint excluded

    Args:
        n_nodes: Number of nodes N (>= 2)
        domain_length: Period of the domain
        origin: Left end of the domain (Burgers presets use -pi)

    Returns:
        GridSet with node i at origin + i*domain_length/N and identity permutation
    """
    if n_nodes < 2:
        raise InvalidArgumentError(f"A grid needs at least 2 nodes, got {n_nodes}")
    if not domain_length > 0:
        raise InvalidArgumentError(f"domain_length must be positive, got {domain_length}")

    nodes = np.arange(n_nodes) * domain_length / n_nodes
    if origin != 0.0:
        nodes = origin + nodes
    return GridSet(
        nodes=nodes,
        permutation=np.arange(n_nodes),
        domain=Domain.periodic(origin, domain_length),
        uniform=True,
    )


def perturb_and_permute_grid(grid: GridSet, fraction: float, seed: int) -> GridSet:
    """
    Jitter every node by up to fraction*h and shuffle the storage order

    Args:
        grid: 1D periodic grid
        fraction: Maximum offset as a fraction of the spacing h, in [0, 0.5)
        seed: Seed of the perturbation and of the Fisher-Yates shuffle

    Returns:
        New GridSet; permutation maps storage index to generation index
    """
    if not 0.0 <= fraction < 0.5:
        raise InvalidArgumentError(f"fraction must lie in [0, 0.5), got {fraction} (nodes could cross)")
    if grid.domain.kind != "periodic":
        raise InvalidArgumentError("Only periodic 1D grids can be perturbed")

    rng = make_rng(seed)
    n = grid.n_nodes
    spacing = grid.domain.length / n

    x = grid.nodes[:, 0]
    if fraction > 0.0:
        offsets = rng.uniform(-fraction * spacing, fraction * spacing, size=n)
        origin = grid.domain.lower[0]
        wrapped = np.mod(x + offsets - origin, grid.domain.length)
        # mod of a tiny negative number can round up to the period itself
        wrapped[wrapped >= grid.domain.length] = 0.0
        x = origin + wrapped
    order = rng.permutation(n)

    return GridSet(
        nodes=x[order],
        permutation=grid.permutation[order],
        domain=grid.domain,
        uniform=grid.uniform and fraction == 0.0,
    )
