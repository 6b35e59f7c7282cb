"""
The trained network as an iterative solver, and its comparison with the reference.

predict sees parameters and nodal values only; grid coordinates never enter it.
"""

import logging
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np

from core.types import GridSet, NodalState, TrajectorySequence
from evaluation.metrics import ErrorReport, compute_error_metrics
from model.network import NetworkParams, apply_model
from sampling.fields import InitialField
from solvers.pde import PdeSpec
from solvers.trajectory import Stepper, solve_trajectory
from utils.errors import DimensionError, InvalidArgumentError, NumericalError

logger = logging.getLogger(__name__)

FlowMap = Callable[[np.ndarray], np.ndarray]


def _flow_map(model: Union[NetworkParams, FlowMap]) -> FlowMap:
    if isinstance(model, NetworkParams):
        return lambda values: apply_model(model, values)
    return model


def predict(model: Union[NetworkParams, FlowMap], ic: NodalState, steps: int,
            dt: float = 1.0) -> TrajectorySequence:
    """
    v^0 = ic, v^{k+1} = N(v^k)

    Args:
        model: Network parameters, or any map of nodal values
        ic: Initial state
        steps: Number of steps K
        dt: Step size used for the state times

    Returns:
        TrajectorySequence of K+1 states, or fewer when the rollout turned
        non-finite (the sequence ends at the last finite state)
    """
    if steps < 0:
        raise InvalidArgumentError(f"steps must be >= 0, got {steps}")
    if isinstance(model, NetworkParams) and ic.values.size != model.dims.n_inputs:
        raise DimensionError(
            f"Initial state has {ic.values.size} values, network expects {model.dims.n_inputs}"
        )
    step = _flow_map(model)
    rows = [np.array(ic.values)]
    for k in range(steps):
        try:
            values = step(rows[-1])
        except NumericalError:
            values = None
        if values is None or not np.all(np.isfinite(values)):
            logger.warning(f"Rollout turned non-finite at step {k + 1}; truncating")
            break
        rows.append(values)
    return TrajectorySequence.from_array(np.stack(rows), dt, ic.n_components)


def oracle_flow_map(spec: PdeSpec, grid: GridSet, dt: float) -> FlowMap:
    """Reference stepper wrapped as a flow map, for pipeline self-tests"""
    return Stepper(spec, grid, dt).advance


def evaluate_against_reference(model: Union[NetworkParams, FlowMap], spec: PdeSpec,
                               ic: InitialField, grid: GridSet, horizon: float, dt: float,
                               metadata: Optional[Dict[str, Any]] = None
                               ) -> Tuple[ErrorReport, TrajectorySequence, TrajectorySequence]:
    """
    Roll the model out to `horizon` and score it against the reference solver

    Args:
        model: Network parameters or a flow map
        spec: PDE of the reference solver
        ic: Out-of-sample initial field
        grid: Grid the model was trained on
        horizon: Final time T; K = round(T / dt) steps
        dt: Model step
        metadata: Extra report metadata

    Returns:
        (report, prediction, reference)
    """
    steps = int(round(horizon / dt))
    if steps < 0 or abs(steps * dt - horizon) > 1e-9 * max(1.0, abs(horizon)):
        raise InvalidArgumentError(f"Horizon {horizon} is not a multiple of dt={dt}")
    reference = solve_trajectory(spec, ic, grid, dt, steps)
    prediction = predict(model, reference.states[0], steps, dt)
    report = compute_error_metrics(prediction, reference)

    report.metadata = {
        "pde": spec.to_dict(),
        "ic": ic.describe(),
        "rollout_horizon": horizon,
        "dt": dt,
        "steps": steps,
        "oracle_substeps": reference.substeps,
    }
    if isinstance(model, NetworkParams):
        report.metadata["model_hash"] = model.sha256()
    else:
        report.metadata["model_hash"] = "oracle"
    report.metadata.update(metadata or {})
    if report.blowup_step is not None:
        logger.warning(f"Prediction blew up at step {report.blowup_step}")
    return report, prediction, reference
