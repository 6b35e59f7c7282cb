"""
Nodal-space flow-map network.

    N(w) = w + F[A(N_1(w), ..., N_J(w))]

N_i are J parallel disassembly nets (tanh o affine)^{n_d} mapping the
N*L nodal values to n_w features; A is one small assembly net applied to
every row of the n_w x J disassembly matrix with shared parameters; F is the
lift back to N*L values (identity when n_w = N*L).
"""

import hashlib
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from typing_extensions import Self

from autodiff.tape import Node, Tape
from core.permutation import check_permutation, expand_permutation
from sampling.rng import make_rng
from utils.errors import DimensionError, InvalidArgumentError

LIFT_KINDS = ("identity", "affine")


@dataclass(frozen=True)
class NetworkDims:
    """
    Shape of the network.

    n_nodes and n_components give the input size N*L; width is n_w, depth the
    number of affine+tanh layers per disassembly net, thickness J and
    assembly_depth n_a (n_a = 1 is a single linear J -> 1 layer).
    """

    n_nodes: int
    width: int
    depth: int = 1
    thickness: int = 5
    assembly_depth: int = 1
    n_components: int = 1
    lift: str = "identity"

    def __post_init__(self):
        for name in ("n_nodes", "width", "depth", "thickness", "assembly_depth", "n_components"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.lift not in LIFT_KINDS:
            raise InvalidArgumentError(f"Unknown lift '{self.lift}' (known: {LIFT_KINDS})")
        if self.lift == "identity" and self.width != self.n_inputs:
            raise InvalidArgumentError(
                f"Identity lift needs width == N*L ({self.n_inputs}), got {self.width}"
            )

    @property
    def n_inputs(self) -> int:
        return self.n_nodes * self.n_components

    def as_tuple(self) -> Tuple[int, int, int, int, int, int]:
        return (self.n_nodes, self.width, self.depth, self.thickness,
                self.assembly_depth, self.n_components)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_nodes": self.n_nodes,
            "width": self.width,
            "depth": self.depth,
            "thickness": self.thickness,
            "assembly_depth": self.assembly_depth,
            "n_components": self.n_components,
            "lift": self.lift,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Self:
        return cls(**data)


def parameter_shapes(dims: NetworkDims) -> List[Tuple[str, Tuple[int, ...]]]:
    """Parameter names and shapes in checkpoint order"""
    shapes = []
    for i in range(dims.thickness):
        fan_in = dims.n_inputs
        for layer in range(dims.depth):
            prefix = f"disassembly.{i}.layer.{layer}"
            shapes.append((f"{prefix}.W", (dims.width, fan_in)))
            shapes.append((f"{prefix}.b", (dims.width,)))
            fan_in = dims.width
    for layer in range(dims.assembly_depth - 1):
        shapes.append((f"assembly.hidden.{layer}.W", (dims.thickness, dims.thickness)))
        shapes.append((f"assembly.hidden.{layer}.b", (dims.thickness,)))
    shapes.append(("assembly.out.W", (1, dims.thickness)))
    shapes.append(("assembly.out.b", (1,)))
    if dims.lift == "affine":
        shapes.append(("lift.W", (dims.n_inputs, dims.width)))
        shapes.append(("lift.b", (dims.n_inputs,)))
    return shapes


def parameter_count(dims: NetworkDims) -> int:
    """
    J*(N*n_w + n_w + (n_d-1)*(n_w^2 + n_w)) + (n_a-1)*(J^2 + J) + (J + 1)
    plus n_w*N + N for an affine lift
    """
    n, w, j = dims.n_inputs, dims.width, dims.thickness
    count = j * (n * w + w + (dims.depth - 1) * (w * w + w))
    count += (dims.assembly_depth - 1) * (j * j + j) + (j + 1)
    if dims.lift == "affine":
        count += w * n + n
    return count


@dataclass(frozen=True)
class NetworkParams:
    """Named parameter arrays in checkpoint order, plus dims and init seed"""

    dims: NetworkDims
    arrays: Dict[str, np.ndarray]
    seed: Optional[int] = None

    def __post_init__(self):
        expected = parameter_shapes(self.dims)
        if list(self.arrays) != [name for name, _ in expected]:
            raise DimensionError("Parameter names do not match the network dims")
        for name, shape in expected:
            if self.arrays[name].shape != shape:
                raise DimensionError(
                    f"Parameter {name} has shape {self.arrays[name].shape}, expected {shape}"
                )

    def __iter__(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self.arrays.items())

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    @property
    def count(self) -> int:
        return sum(a.size for a in self.arrays.values())

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays.values()])

    @classmethod
    def from_flat(cls, dims: NetworkDims, vector: np.ndarray, seed: Optional[int] = None) -> Self:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.size != parameter_count(dims):
            raise DimensionError(
                f"{vector.size} values do not match the {parameter_count(dims)} parameters of {dims}"
            )
        arrays = {}
        offset = 0
        for name, shape in parameter_shapes(dims):
            size = int(np.prod(shape))
            arrays[name] = vector[offset:offset + size].reshape(shape).copy()
            offset += size
        return cls(dims, arrays, seed)

    def replace(self, arrays: Dict[str, np.ndarray]) -> Self:
        return NetworkParams(self.dims, {name: arrays[name] for name in self.arrays}, self.seed)

    def sha256(self) -> str:
        return hashlib.sha256(self.flat().astype("<f8").tobytes()).hexdigest()


def zero_params(dims: NetworkDims) -> NetworkParams:
    return NetworkParams(dims, {name: np.zeros(shape) for name, shape in parameter_shapes(dims)})


def init_params(dims: NetworkDims, seed: int, output_scale: float = 1.0) -> NetworkParams:
    """
    Glorot-uniform weights, zero biases

    Args:
        dims: Network shape
        seed: Init seed; weights are drawn in checkpoint order
        output_scale: Factor on the final assembly weights after drawing; values
            below 1 start the flow map closer to the identity

    Returns:
        NetworkParams
    """
    if not (np.isfinite(output_scale) and output_scale >= 0.0):
        raise InvalidArgumentError(f"output_scale must be finite and non-negative, got {output_scale}")
    rng = make_rng(seed)
    arrays = {}
    for name, shape in parameter_shapes(dims):
        if name.endswith(".b"):
            arrays[name] = np.zeros(shape)
        else:
            fan_out, fan_in = shape
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            arrays[name] = rng.uniform(-limit, limit, size=shape)
    arrays["assembly.out.W"] = arrays["assembly.out.W"] * output_scale
    return NetworkParams(dims, arrays, seed)


def param_nodes(params: NetworkParams, tape: Tape) -> Dict[str, Node]:
    return {name: tape.param(name, value) for name, value in params}


def disassembly_forward(dims: NetworkDims, nodes: Dict[str, Node], w: Node, tape: Tape) -> Node:
    """Stack of the J disassembly outputs, shape (..., n_w, J)"""
    if w.shape[-1] != dims.n_inputs:
        raise DimensionError(f"Input has {w.shape[-1]} values, network expects {dims.n_inputs}")
    columns = []
    for i in range(dims.thickness):
        hidden = w
        for layer in range(dims.depth):
            prefix = f"disassembly.{i}.layer.{layer}"
            hidden = tape.tanh(tape.affine(nodes[f"{prefix}.W"], nodes[f"{prefix}.b"], hidden))
        columns.append(hidden)
    return tape.stack(columns)


def assembly_forward(dims: NetworkDims, nodes: Dict[str, Node], matrix: Node, tape: Tape) -> Node:
    """Shared row-wise assembly: (..., n_w, J) -> (..., n_w)"""
    if matrix.shape[-2:] != (dims.width, dims.thickness):
        raise DimensionError(
            f"Disassembly matrix has shape {matrix.shape[-2:]}, expected {(dims.width, dims.thickness)}"
        )
    hidden = matrix
    for layer in range(dims.assembly_depth - 1):
        prefix = f"assembly.hidden.{layer}"
        hidden = tape.tanh(tape.affine(nodes[f"{prefix}.W"], nodes[f"{prefix}.b"], hidden))
    out = tape.affine(nodes["assembly.out.W"], nodes["assembly.out.b"], hidden)
    return tape.reshape(out, out.shape[:-1])


def model_forward(params: NetworkParams, w, tape: Optional[Tape] = None) -> Node:
    """
    One application of the flow map

    Args:
        params: Network parameters
        w: (..., N*L) input, as a node of `tape` or an array
        tape: Recording tape; a non-recording one is used when None

    Returns:
        Node holding w + F[A(N_1(w), ..., N_J(w))]
    """
    tape = Tape(record=False) if tape is None else tape
    if not isinstance(w, Node):
        w = tape.constant(w)
    nodes = param_nodes(params, tape)
    dims = params.dims
    assembled = assembly_forward(dims, nodes, disassembly_forward(dims, nodes, w, tape), tape)
    if dims.lift == "affine":
        assembled = tape.affine(nodes["lift.W"], nodes["lift.b"], assembled)
    return tape.add(w, assembled)


def apply_model(params: NetworkParams, w: np.ndarray) -> np.ndarray:
    """Inference-only forward on an array"""
    return model_forward(params, np.asarray(w, dtype=np.float64)).value


def conjugate_params_by_permutation(params: NetworkParams, perm: Sequence[int]) -> NetworkParams:
    """
    Parameters of the same network acting on permuted node storage

    With P w = w[perm], the result satisfies
    model_forward(conjugated, P w) = P model_forward(params, w).

    Args:
        params: Identity-lift parameters
        perm: Node permutation of length N (or N*L for systems)

    Returns:
        NetworkParams with W'[i, j] = W[perm[i], perm[j]] and b' = b[perm]
        in every disassembly layer; assembly parameters unchanged
    """
    dims = params.dims
    if dims.lift != "identity":
        raise InvalidArgumentError("Permutation conjugation needs the identity lift")
    perm = np.asarray(perm, dtype=np.int64)
    if perm.size == dims.n_nodes and dims.n_components > 1:
        perm = expand_permutation(check_permutation(perm, dims.n_nodes), dims.n_components)
    perm = check_permutation(perm, dims.n_inputs)

    arrays = {}
    for name, value in params:
        if name.startswith("disassembly."):
            arrays[name] = value[perm][:, perm] if name.endswith(".W") else value[perm]
        else:
            arrays[name] = value.copy()
    return NetworkParams(dims, arrays, params.seed)
