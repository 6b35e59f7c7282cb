"""
Shared vocabulary: grids, nodal states, trajectory sequences and datasets.

All containers are frozen dataclasses over read-only float64 arrays, so they
can be shared between threads without copying.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from utils.errors import DimensionError, InvalidArgumentError, NumericalError


def _frozen(array: np.ndarray, dtype=np.float64) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Domain:
    """
    Geometric domain of a grid.

    kind is "periodic" (1D interval [lower, upper)) or "box"
    (closed box, lower/upper per axis).
    """

    kind: str
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    @classmethod
    def periodic(cls, origin: float, length: float) -> "Domain":
        return cls("periodic", (float(origin),), (float(origin + length),))

    @classmethod
    def box(cls, lower: Tuple[float, float] = (-1.0, -1.0),
            upper: Tuple[float, float] = (1.0, 1.0)) -> "Domain":
        return cls("box", tuple(float(v) for v in lower), tuple(float(v) for v in upper))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def length(self) -> float:
        return self.upper[0] - self.lower[0]

    def contains(self, nodes: np.ndarray) -> bool:
        lower = np.asarray(self.lower)
        upper = np.asarray(self.upper)
        if self.kind == "periodic":
            return bool(np.all((nodes >= lower) & (nodes < upper)))
        return bool(np.all((nodes >= lower) & (nodes <= upper)))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "lower": list(self.lower), "upper": list(self.upper)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Domain":
        return cls(data["kind"], tuple(data["lower"]), tuple(data["upper"]))


@dataclass(frozen=True)
class GridSet:
    """
    Node coordinates X_N plus the storage permutation.

    permutation[i] is the generation index of the node stored at position i.
    The grid carries no connectivity; learning code never reads it.
    """

    nodes: np.ndarray
    permutation: np.ndarray
    domain: Domain
    uniform: bool = False

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        perm = np.asarray(self.permutation, dtype=np.int64)
        if nodes.shape[0] < 2:
            raise InvalidArgumentError(f"A grid needs at least 2 nodes, got {nodes.shape[0]}")
        if nodes.shape[1] != self.domain.dim:
            raise DimensionError(
                f"Node dimension {nodes.shape[1]} does not match domain dimension {self.domain.dim}"
            )
        if perm.shape != (nodes.shape[0],):
            raise DimensionError(f"Permutation length {perm.shape} does not match {nodes.shape[0]} nodes")
        if not np.array_equal(np.sort(perm), np.arange(nodes.shape[0])):
            raise InvalidArgumentError("Permutation is not a bijection on 0..N-1")
        if not self.domain.contains(nodes):
            raise InvalidArgumentError("Grid nodes fall outside the declared domain")
        object.__setattr__(self, "nodes", _frozen(nodes))
        object.__setattr__(self, "permutation", _frozen(perm, np.int64))

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def is_identity_ordered(self) -> bool:
        return bool(np.array_equal(self.permutation, np.arange(self.n_nodes)))

    @property
    def is_uniform_periodic(self) -> bool:
        """True for an identity-ordered uniform 1D periodic grid"""
        return self.uniform and self.domain.kind == "periodic" and self.is_identity_ordered

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridSet):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.uniform == other.uniform
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.permutation, other.permutation)
        )

    __hash__ = None


@dataclass(frozen=True)
class NodalState:
    """Solution values over a grid at one time, component-major"""

    values: np.ndarray
    time: float = 0.0
    n_components: int = 1

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if self.n_components < 1 or values.size % self.n_components != 0:
            raise DimensionError(
                f"{values.size} values cannot be split into {self.n_components} components"
            )
        if not np.all(np.isfinite(values)):
            raise NumericalError("NodalState values must be finite")
        if self.time < 0:
            raise InvalidArgumentError(f"time must be non-negative, got {self.time}")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "time", float(self.time))

    @property
    def n_nodes(self) -> int:
        return self.values.size // self.n_components

    @property
    def layout(self) -> Tuple[int, int]:
        return (self.n_nodes, self.n_components)

    def component(self, index: int) -> np.ndarray:
        n = self.n_nodes
        return self.values[index * n:(index + 1) * n]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NodalState):
            return NotImplemented
        return (
            self.time == other.time
            and self.n_components == other.n_components
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True)
class TrajectorySequence:
    """n_L+1 states at relative times k*dt"""

    states: Tuple[NodalState, ...]
    dt: float
    substeps: int = 1

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise InvalidArgumentError("A trajectory needs at least one state")
        layout = states[0].layout
        for k, state in enumerate(states):
            if state.layout != layout:
                raise DimensionError(f"State {k} has layout {state.layout}, expected {layout}")
        object.__setattr__(self, "states", states)

    @classmethod
    def from_array(cls, values: np.ndarray, dt: float, n_components: int = 1,
                   substeps: int = 1) -> "TrajectorySequence":
        """Build from a (steps+1, N*L) array; state k gets time k*dt"""
        states = tuple(
            NodalState(row, time=k * dt, n_components=n_components)
            for k, row in enumerate(np.asarray(values, dtype=np.float64))
        )
        return cls(states, dt, substeps)

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    def as_array(self) -> np.ndarray:
        return np.stack([s.values for s in self.states])


@dataclass(frozen=True)
class TrajectoryDataset:
    """M sequences sharing grid, n_L, dt and layout"""

    grid: GridSet
    sequences: Tuple[TrajectorySequence, ...]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        sequences = tuple(self.sequences)
        if not sequences:
            raise InvalidArgumentError("A dataset needs at least one sequence (M >= 1)")
        first = sequences[0]
        for j, seq in enumerate(sequences):
            if seq.n_steps != first.n_steps or seq.dt != first.dt:
                raise DimensionError(f"Sequence {j} disagrees on n_L or dt")
            if seq.states[0].layout != first.states[0].layout:
                raise DimensionError(f"Sequence {j} disagrees on layout")
        if first.states[0].n_nodes != self.grid.n_nodes:
            raise DimensionError(
                f"States have {first.states[0].n_nodes} nodes, grid has {self.grid.n_nodes}"
            )
        object.__setattr__(self, "sequences", sequences)

    @property
    def n_sequences(self) -> int:
        return len(self.sequences)

    @property
    def n_steps(self) -> int:
        return self.sequences[0].n_steps

    @property
    def dt(self) -> float:
        return self.sequences[0].dt

    @property
    def n_components(self) -> int:
        return self.sequences[0].states[0].n_components

    @property
    def state_size(self) -> int:
        return self.sequences[0].states[0].values.size

    def as_array(self) -> np.ndarray:
        """(M, n_L+1, N*L) array of all values"""
        return np.stack([seq.as_array() for seq in self.sequences])

    @classmethod
    def from_array(cls, grid: GridSet, values: np.ndarray, dt: float, n_components: int = 1,
                   metadata: Optional[Dict[str, Any]] = None) -> "TrajectoryDataset":
        sequences = [
            TrajectorySequence.from_array(block, dt, n_components) for block in values
        ]
        return cls(grid, tuple(sequences), dict(metadata or {}))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrajectoryDataset):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.metadata == other.metadata
            and self.dt == other.dt
            and self.n_components == other.n_components
            and np.array_equal(self.as_array(), other.as_array())
        )

    __hash__ = None
