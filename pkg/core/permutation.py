"""
Node relabelling and component concatenation.

A permutation p acts on a state by new[i] = old[p[i]] inside every component
block; its inverse is argsort(p).
"""

from typing import List, Sequence

import numpy as np

from core.types import NodalState
from utils.errors import DimensionError, InvalidArgumentError


def check_permutation(perm: Sequence[int], n: int) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (n,):
        raise DimensionError(f"Permutation has length {perm.size}, expected {n}")
    if not np.array_equal(np.sort(perm), np.arange(n)):
        raise InvalidArgumentError("Permutation is not a bijection")
    return perm


def inverse_permutation(perm: Sequence[int]) -> np.ndarray:
    return np.argsort(np.asarray(perm, dtype=np.int64), kind="stable")


def expand_permutation(perm: Sequence[int], n_components: int) -> np.ndarray:
    """Lift a node permutation to the component-major vector of a system"""
    perm = np.asarray(perm, dtype=np.int64)
    n = perm.size
    return np.concatenate([perm + c * n for c in range(n_components)])


def permute_values(values: np.ndarray, perm: np.ndarray, n_components: int = 1) -> np.ndarray:
    """Apply a node permutation along the last axis of (..., N*L) values"""
    values = np.asarray(values)
    n = values.shape[-1] // n_components
    perm = check_permutation(perm, n)
    return values[..., expand_permutation(perm, n_components)]


def apply_permutation(state: NodalState, perm: Sequence[int]) -> NodalState:
    """
    Reorder the nodes of a state

    Args:
        state: State with L components over N nodes
        perm: Bijection of length N, applied within each component block

    Returns:
        New NodalState with values[c*N + i] = old[c*N + perm[i]]
    """
    values = permute_values(state.values, perm, state.n_components)
    return NodalState(values, time=state.time, n_components=state.n_components)


def concat_components(states: List[NodalState]) -> NodalState:
    """Stack states over the same grid and time into one component-major state"""
    if not states:
        raise InvalidArgumentError("concat_components needs at least one state")
    n = states[0].n_nodes
    time = states[0].time
    for state in states[1:]:
        if state.n_nodes != n:
            raise DimensionError(f"Cannot concatenate states over {n} and {state.n_nodes} nodes")
        if state.time != time:
            raise InvalidArgumentError("Cannot concatenate states at different times")
    if len(states) == 1:
        return states[0]
    return NodalState(
        np.concatenate([s.values for s in states]),
        time=time,
        n_components=sum(s.n_components for s in states),
    )


def split_components(state: NodalState, sizes: Sequence[int] = None) -> List[NodalState]:
    """
    Inverse of concat_components

    Args:
        state: Concatenated state
        sizes: Component count of every part (defaults to one per component)

    Returns:
        List of states whose concatenation is the input
    """
    sizes = [1] * state.n_components if sizes is None else list(sizes)
    if sum(sizes) != state.n_components or any(s < 1 for s in sizes):
        raise DimensionError(f"Sizes {sizes} do not add up to {state.n_components} components")
    n = state.n_nodes
    parts = []
    start = 0
    for size in sizes:
        stop = start + size * n
        parts.append(NodalState(state.values[start:stop], time=state.time, n_components=size))
        start = stop
    return parts
