"""
Tape-based reverse-mode differentiation over numpy arrays.

The primitive set is small: affine (over the last axis), tanh, add, scale,
gather (last axis), stack (new last axis), reshape and sum of squares.
Everything the network and the recurrent loss need factors through it.
Backward rules are looked up by op name as `_backward_<op>` methods.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import DimensionError, InvalidArgumentError, NumericalError


@dataclass(frozen=True)
class Node:
    """Handle to a recorded value"""

    index: int
    value: np.ndarray

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape


@dataclass
class Record:
    op: str
    inputs: Tuple[int, ...]
    value: np.ndarray
    extra: Any = None


class Tape:
    """
    Append-only record of primitive operations.

    With record=False the same calls only compute values, which is what
    inference uses.
    """

    def __init__(self, record: bool = True):
        self.record = record
        self.records: List[Record] = []
        self.param_nodes: Dict[str, Node] = {}
        self._swept = False

    def reset(self):
        self.records = []
        self.param_nodes = {}
        self._swept = False

    def _push(self, op: str, inputs: Tuple[int, ...], value: np.ndarray, extra: Any = None) -> Node:
        if not np.all(np.isfinite(value)):
            raise NumericalError(f"Non-finite values produced by '{op}'")
        if not self.record:
            return Node(-1, value)
        if self._swept:
            raise InvalidArgumentError("Tape was already swept; reset it before recording again")
        self.records.append(Record(op, inputs, value, extra))
        return Node(len(self.records) - 1, value)

    # ---- leaves ----

    def param(self, name: str, value: np.ndarray) -> Node:
        """Differentiable leaf; repeated calls with the same name return the same node"""
        node = self.param_nodes.get(name)
        if node is None:
            node = self._push("param", (), np.asarray(value, dtype=np.float64), name)
            self.param_nodes[name] = node
        return node

    def constant(self, value) -> Node:
        return self._push("constant", (), np.asarray(value, dtype=np.float64))

    # ---- primitives ----

    def affine(self, W: Node, b: Node, x: Node) -> Node:
        """y = x @ W.T + b over the last axis of x"""
        if W.value.ndim != 2 or b.shape != (W.shape[0],) or x.shape[-1] != W.shape[1]:
            raise DimensionError(f"affine shapes do not conform: W{W.shape}, b{b.shape}, x{x.shape}")
        value = x.value @ W.value.T + b.value
        return self._push("affine", (W.index, b.index, x.index), value)

    def tanh(self, x: Node) -> Node:
        return self._push("tanh", (x.index,), np.tanh(x.value))

    def add(self, a: Node, b: Node) -> Node:
        if a.shape != b.shape:
            raise DimensionError(f"add needs equal shapes, got {a.shape} and {b.shape}")
        return self._push("add", (a.index, b.index), a.value + b.value)

    def scale(self, x: Node, factor: float) -> Node:
        return self._push("scale", (x.index,), x.value * factor, float(factor))

    def gather(self, x: Node, indices: Sequence[int]) -> Node:
        """x[..., indices]"""
        indices = np.asarray(indices, dtype=np.int64)
        return self._push("gather", (x.index,), x.value[..., indices], (indices, x.shape))

    def stack(self, nodes: Sequence[Node]) -> Node:
        """Stack equal-shaped nodes along a new last axis"""
        if not nodes:
            raise InvalidArgumentError("stack needs at least one node")
        value = np.stack([n.value for n in nodes], axis=-1)
        return self._push("stack", tuple(n.index for n in nodes), value)

    def reshape(self, x: Node, shape: Tuple[int, ...]) -> Node:
        return self._push("reshape", (x.index,), x.value.reshape(shape), x.shape)

    def sum_squares(self, x: Node) -> Node:
        return self._push("sum_squares", (x.index,), np.asarray(np.sum(np.square(x.value))))

    # ---- reverse sweep ----

    def backward(self, loss: Node) -> Dict[str, np.ndarray]:
        """
        Reverse sweep from a scalar node

        Returns:
            Gradient per parameter name; parameters the loss does not reach
            get zeros
        """
        if not self.record:
            raise InvalidArgumentError("backward needs a recording tape")
        if loss.value.size != 1:
            raise DimensionError(f"backward needs a scalar loss, got shape {loss.shape}")
        if loss.index < 0 or loss.index >= len(self.records):
            raise InvalidArgumentError("Loss node does not belong to this tape")

        grads: List[Optional[np.ndarray]] = [None] * len(self.records)
        grads[loss.index] = np.ones_like(self.records[loss.index].value)
        for index in range(loss.index, -1, -1):
            grad = grads[index]
            if grad is None:
                continue
            record = self.records[index]
            if record.op in ("param", "constant"):
                continue
            rule = getattr(self, f"_backward_{record.op}")
            for input_index, input_grad in zip(record.inputs, rule(record, grad)):
                if input_grad is None:
                    continue
                if grads[input_index] is None:
                    grads[input_index] = input_grad
                else:
                    grads[input_index] = grads[input_index] + input_grad
        self._swept = True

        store = {}
        for name, node in self.param_nodes.items():
            grad = grads[node.index]
            store[name] = np.zeros_like(node.value) if grad is None else grad
        return store

    def _backward_affine(self, record: Record, grad: np.ndarray):
        W = self.records[record.inputs[0]].value
        x = self.records[record.inputs[2]].value
        flat_grad = grad.reshape(-1, W.shape[0])
        flat_x = x.reshape(-1, W.shape[1])
        return flat_grad.T @ flat_x, flat_grad.sum(axis=0), grad @ W

    def _backward_tanh(self, record: Record, grad: np.ndarray):
        return (grad * (1.0 - record.value ** 2),)

    def _backward_add(self, record: Record, grad: np.ndarray):
        return grad, grad

    def _backward_scale(self, record: Record, grad: np.ndarray):
        return (grad * record.extra,)

    def _backward_gather(self, record: Record, grad: np.ndarray):
        indices, shape = record.extra
        out = np.zeros(shape)
        np.add.at(np.moveaxis(out, -1, 0), indices, np.moveaxis(grad, -1, 0))
        return (out,)

    def _backward_stack(self, record: Record, grad: np.ndarray):
        return tuple(grad[..., k] for k in range(len(record.inputs)))

    def _backward_reshape(self, record: Record, grad: np.ndarray):
        return (grad.reshape(record.extra),)

    def _backward_sum_squares(self, record: Record, grad: np.ndarray):
        x = self.records[record.inputs[0]].value
        return (2.0 * x * grad,)


def grad_check(f: Callable[[Tape, Dict[str, Node]], Node], params: Dict[str, np.ndarray],
               h: float = 1e-6, n_samples: int = 100, seed: int = 0,
               tape_cls: type = Tape) -> float:
    """
    Compare reverse-mode gradients with central differences

    Args:
        f: Builds a scalar loss node from parameter nodes on the given tape
        params: Parameter arrays by name
        h: Relative step; coordinate theta uses h * (1 + |theta|)
        n_samples: Number of coordinates sampled across all parameters
        seed: Seed of the coordinate sampler
        tape_cls: Tape class used for the analytic gradient

    Returns:
        max |analytic - fd| / max(1, |fd|) over the sampled coordinates
    """
    if not h > 0:
        raise InvalidArgumentError(f"h must be positive, got {h}")

    def evaluate(values: Dict[str, np.ndarray]) -> float:
        tape = Tape(record=False)
        nodes = {name: tape.param(name, value) for name, value in values.items()}
        return float(f(tape, nodes).value)

    tape = tape_cls()
    nodes = {name: tape.param(name, value) for name, value in params.items()}
    analytic = tape.backward(f(tape, nodes))

    coordinates = [(name, i) for name, value in params.items() for i in range(np.size(value))]
    rng = np.random.default_rng(seed)
    if len(coordinates) > n_samples:
        picks = rng.choice(len(coordinates), size=n_samples, replace=False)
        coordinates = [coordinates[k] for k in sorted(picks)]

    worst = 0.0
    for name, flat_index in coordinates:
        base = np.asarray(params[name], dtype=np.float64)
        theta = base.flat[flat_index]
        step = h * (1.0 + abs(theta))
        shifted = dict(params)
        plus = base.copy()
        plus.flat[flat_index] = theta + step
        shifted[name] = plus
        f_plus = evaluate(shifted)
        minus = base.copy()
        minus.flat[flat_index] = theta - step
        shifted[name] = minus
        f_minus = evaluate(shifted)
        fd = (f_plus - f_minus) / (2.0 * step)
        error = abs(analytic[name].flat[flat_index] - fd) / max(1.0, abs(fd))
        worst = max(worst, error)
    return worst
