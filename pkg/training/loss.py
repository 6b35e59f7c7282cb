"""
Recurrent multi-step loss and its gradient by backprop through the unrolled rollout.
"""

from typing import Dict, Optional, Tuple

import numpy as np

from autodiff.tape import Node, Tape
from model.network import NetworkParams, model_forward, param_nodes
from utils.errors import DimensionError, InvalidArgumentError
from utils.parallel import map_ordered


def _check_batch(batch: np.ndarray, n_steps: int, params: NetworkParams) -> np.ndarray:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 3:
        raise DimensionError(f"Batch must be (B, states, N*L), got shape {batch.shape}")
    if n_steps < 1:
        raise InvalidArgumentError(f"n_L must be >= 1, got {n_steps}")
    if batch.shape[1] < n_steps + 1:
        raise DimensionError(f"Sequences have {batch.shape[1]} states, n_L={n_steps} needs {n_steps + 1}")
    if batch.shape[2] != params.dims.n_inputs:
        raise DimensionError(f"States have {batch.shape[2]} values, network expects {params.dims.n_inputs}")
    return batch


def mse_loss(prediction: np.ndarray, target: np.ndarray, normalizer: Optional[int] = None) -> float:
    """sum over the batch of squared errors, divided by the batch size"""
    normalizer = prediction.shape[0] if normalizer is None else normalizer
    return float(np.sum(np.square(prediction - target)) * (1.0 / normalizer))


def recurrent_loss(params: NetworkParams, batch: np.ndarray, n_steps: int, tape: Tape,
                   normalizer: Optional[int] = None) -> Node:
    """
    sum_{n=1..n_L} (1/B) sum_j ||N^n(u_j(0)) - u_j(n dt)||^2

    Args:
        params: Network parameters
        batch: (B, >= n_L+1, N*L) sequences
        n_steps: Recurrence length n_L
        tape: Tape to record on
        normalizer: Divisor in place of B (used by shards of a larger batch)

    Returns:
        Scalar loss node
    """
    batch = _check_batch(batch, n_steps, params)
    normalizer = batch.shape[0] if normalizer is None else normalizer
    param_nodes(params, tape)
    current = tape.constant(batch[:, 0])
    total = None
    for n in range(1, n_steps + 1):
        current = model_forward(params, current, tape)
        residual = tape.add(current, tape.constant(-batch[:, n]))
        term = tape.scale(tape.sum_squares(residual), 1.0 / normalizer)
        total = term if total is None else tape.add(total, term)
    return total


def _shard_gradient(args) -> Tuple[float, Dict[str, np.ndarray]]:
    params, shard, n_steps, normalizer = args
    tape = Tape()
    loss = recurrent_loss(params, shard, n_steps, tape, normalizer)
    return float(loss.value), tape.backward(loss)


def loss_gradient(params: NetworkParams, batch: np.ndarray, n_steps: int, shards: int = 1,
                  threads: Optional[int] = None) -> Tuple[float, Dict[str, np.ndarray]]:
    """
    Loss value and exact gradient

    The batch is cut into `shards` contiguous pieces, each on its own tape;
    results are summed in shard order.

    Returns:
        (loss, gradient per parameter name)
    """
    batch = _check_batch(batch, n_steps, params)
    size = batch.shape[0]
    pieces = [p for p in np.array_split(batch, min(shards, size)) if p.shape[0]]
    results = map_ordered(_shard_gradient, [(params, p, n_steps, size) for p in pieces], threads)

    loss, grads = results[0]
    grads = dict(grads)
    for shard_loss, shard_grads in results[1:]:
        loss += shard_loss
        for name in grads:
            grads[name] = grads[name] + shard_grads[name]
    return loss, grads
