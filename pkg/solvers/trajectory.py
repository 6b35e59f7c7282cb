"""
Trajectory and dataset generation on top of the reference steppers.
"""

import logging
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from config import Config
from core.grid import make_uniform_periodic_grid
from core.types import GridSet, NodalState, TrajectoryDataset, TrajectorySequence
from sampling.fields import InitialField
from sampling.rng import substream
from sampling.samplers import Sampler, draw_for_trajectory
from solvers.advdiff import advdiff_cn_values
from solvers.advdiff2d import advdiff2d_reference
from solvers.burgers import inviscid_burgers_values, viscous_burgers_values, weno_substeps
from solvers.exact import fourth_order_values, integro_values, wave_values
from solvers.pde import (
    AdvDiff2D,
    AdvectionDiffusion1D,
    FourthOrder,
    IntegroDiffDemo,
    InviscidBurgers,
    PdeSpec,
    ViscousBurgers,
    WaveSystem,
)
from solvers.spectral import SpectralOperator1D, require_uniform_periodic
from utils.errors import DimensionError, InvalidArgumentError
from utils.parallel import map_ordered

logger = logging.getLogger(__name__)


class Stepper:
    """Advances component-major values on a uniform periodic grid by one output step"""

    def __init__(self, spec: PdeSpec, grid: GridSet, dt: float):
        require_uniform_periodic(grid)
        if not dt > 0:
            raise InvalidArgumentError(f"dt must be positive, got {dt}")
        self.spec = spec
        self.grid = grid
        self.dt = float(dt)
        self.operator = SpectralOperator1D.for_grid(grid)
        self.h = grid.domain.length / grid.n_nodes
        self.substeps = spec.substeps_for(dt)
        self.max_substeps = self.substeps
        self._advance = self._build()

    def _build(self) -> Callable[[np.ndarray, float], np.ndarray]:
        spec, operator, grid = self.spec, self.operator, self.grid
        if isinstance(spec, AdvectionDiffusion1D):
            return lambda v, h: advdiff_cn_values(v, spec, grid, h)
        if isinstance(spec, FourthOrder):
            return lambda v, h: fourth_order_values(v, operator, spec.c, h)
        if isinstance(spec, ViscousBurgers):
            return lambda v, h: viscous_burgers_values(v, operator, spec.nu, h)
        if isinstance(spec, InviscidBurgers):
            return lambda v, h: inviscid_burgers_values(v, h, self.h, spec.cfl)
        if isinstance(spec, IntegroDiffDemo):
            return lambda v, h: integro_values(v, operator, spec.nu, spec.gamma, h)
        if isinstance(spec, WaveSystem):
            def advance_wave(v, h):
                n = grid.n_nodes
                u1, u2 = wave_values(v[:n], v[n:], operator, h)
                return np.concatenate([u1, u2])
            return advance_wave
        raise InvalidArgumentError(f"No 1D stepper for PDE kind '{spec.kind}'")

    def advance(self, values: np.ndarray) -> np.ndarray:
        substeps = self.substeps
        if isinstance(self.spec, InviscidBurgers):
            substeps = weno_substeps(values, self.dt, self.h, self.spec.cfl)
        self.max_substeps = max(self.max_substeps, substeps)
        h = self.dt / substeps
        for _ in range(substeps):
            values = self._advance(values, h)
        return values


def _oracle_grid(grid: GridSet) -> GridSet:
    n = Config.ORACLE_GRID_MULTIPLIER * grid.n_nodes
    n += n % 2
    return make_uniform_periodic_grid(n, grid.domain.length, origin=grid.domain.lower[0])


def _run_1d(spec: PdeSpec, values: np.ndarray, grid: GridSet, dt: float,
            steps: int) -> Tuple[np.ndarray, int]:
    stepper = Stepper(spec, grid, dt)
    rows = [values]
    for _ in range(steps):
        values = stepper.advance(values)
        rows.append(values)
    return np.stack(rows), stepper.max_substeps


def solve_trajectory(spec: PdeSpec, ic: Union[InitialField, NodalState], grid: GridSet,
                     dt: float, steps: int) -> TrajectorySequence:
    """
    Iterate the reference stepper for `steps` output steps

    Args:
        spec: PDE to solve
        ic: Field (any grid) or nodal values (uniform periodic 1D grids only)
        grid: Output grid; non-uniform 1D grids go through a finer uniform
            oracle grid and Fourier interpolation
        dt: Output step
        steps: Number of output steps

    Returns:
        TrajectorySequence of steps+1 states, substeps recorded
    """
    if steps < 0:
        raise InvalidArgumentError(f"steps must be >= 0, got {steps}")
    if grid.dim != spec.dim:
        raise InvalidArgumentError(f"PDE '{spec.kind}' needs a {spec.dim}D grid, got {grid.dim}D")
    if isinstance(ic, InitialField) and ic.n_components != spec.n_components:
        raise DimensionError(
            f"Initial field has {ic.n_components} components, PDE needs {spec.n_components}"
        )

    if isinstance(spec, AdvDiff2D):
        if not isinstance(ic, InitialField):
            raise InvalidArgumentError("The 2D reference needs the initial condition as a field")
        result = advdiff2d_reference(ic, spec, steps * dt, dt, grid,
                                     output_times=[k * dt for k in range(steps + 1)])
        return TrajectorySequence.from_array(result.values, dt, 1, substeps=1)

    if grid.is_uniform_periodic:
        if isinstance(ic, InitialField):
            values = ic.on_grid(grid).values
        else:
            if ic.values.size != grid.n_nodes * spec.n_components:
                raise DimensionError(
                    f"Initial state has {ic.values.size} values, expected "
                    f"{grid.n_nodes * spec.n_components}"
                )
            values = np.array(ic.values)
        rows, substeps = _run_1d(spec, values, grid, dt, steps)
        return TrajectorySequence.from_array(rows, dt, spec.n_components, substeps)

    if grid.domain.kind != "periodic":
        raise InvalidArgumentError("1D reference solvers need a periodic grid")
    if not isinstance(ic, InitialField):
        raise InvalidArgumentError(
            "Non-uniform grids need the initial condition as a field, not nodal values"
        )
    oracle = _oracle_grid(grid)
    rows, substeps = _run_1d(spec, ic.on_grid(oracle).values, oracle, dt, steps)
    operator = SpectralOperator1D.for_grid(oracle)
    n = oracle.n_nodes
    blocks = rows.reshape(rows.shape[0], spec.n_components, n)
    sampled = operator.interpolate(blocks, grid.nodes[:, 0])
    return TrajectorySequence.from_array(
        sampled.reshape(rows.shape[0], -1), dt, spec.n_components, substeps
    )


def generate_dataset(spec: PdeSpec, sampler: Sampler, grid: GridSet, n_sequences: int,
                     n_steps: int, dt: float, seed: int,
                     threads: Optional[int] = None) -> TrajectoryDataset:
    """
    M independent trajectories from per-index substreams of `seed`

    Trajectory j draws its initial field from substream(seed, j), so the
    result does not depend on the thread count.
    """
    if n_sequences < 1:
        raise InvalidArgumentError(f"M must be >= 1, got {n_sequences}")
    if n_steps < 0:
        raise InvalidArgumentError(f"n_L must be >= 0, got {n_steps}")
    if sampler.dim != grid.dim:
        raise InvalidArgumentError(f"{grid.dim}D grid passed to a {sampler.dim}D sampler")

    def one(index: int) -> TrajectorySequence:
        field = draw_for_trajectory(sampler, substream(seed, index), index, n_sequences)
        return solve_trajectory(spec, field, grid, dt, n_steps)

    logger.info(f"Generating {n_sequences} trajectories of '{spec.kind}' (n_L={n_steps}, dt={dt})")
    sequences: List[TrajectorySequence] = map_ordered(one, list(range(n_sequences)), threads)
    metadata = {
        "pde": spec.to_dict(),
        "seed": int(seed),
        "n_sequences": int(n_sequences),
        "n_steps": int(n_steps),
        "dt": float(dt),
        "oracle_substeps": int(max(seq.substeps for seq in sequences)),
        "oracle_grid": None if grid.is_uniform_periodic or grid.dim != 1
        else _oracle_grid(grid).n_nodes,
    }
    return TrajectoryDataset(grid, tuple(sequences), metadata)
