"""
Learning-rate schedules and the Adam update.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np
from typing_extensions import Self

from model.network import NetworkParams
from training.config import AdamConfig, ScheduleConfig
from utils.errors import DimensionError, InvalidArgumentError


def cyclic_lr(step: int, schedule: ScheduleConfig) -> float:
    """
    lr_min + (lr_max - lr_min) * decay^step * tri(step)

    tri is a triangle wave of period `period_steps`: 1 at step 0, 0 at the
    half period.
    """
    if step < 0:
        raise InvalidArgumentError(f"step must be >= 0, got {step}")
    phase = (step % schedule.period_steps) / schedule.period_steps
    triangle = abs(2.0 * phase - 1.0)
    return schedule.lr_min + (schedule.lr_max - schedule.lr_min) * schedule.decay ** step * triangle


def learning_rate(step: int, schedule: ScheduleConfig) -> float:
    if schedule.kind == "constant":
        return schedule.lr
    return cyclic_lr(step, schedule)


@dataclass
class AdamState:
    """First and second moments per parameter plus the global step count"""

    step: int
    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]

    @classmethod
    def zeros(cls, params: NetworkParams) -> Self:
        return cls(
            step=0,
            m={name: np.zeros_like(value) for name, value in params},
            v={name: np.zeros_like(value) for name, value in params},
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "step": self.step,
            "m": {name: value.ravel().tolist() for name, value in self.m.items()},
            "v": {name: value.ravel().tolist() for name, value in self.v.items()},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], params: NetworkParams) -> Self:
        state = cls.zeros(params)
        state.step = int(data["step"])
        for key in ("m", "v"):
            target = getattr(state, key)
            if set(data[key]) != set(target):
                raise DimensionError(f"Optimizer state '{key}' does not match the parameters")
            for name, zeros in target.items():
                values = np.asarray(data[key][name], dtype=np.float64)
                if values.size != zeros.size:
                    raise DimensionError(f"Optimizer state for {name} has {values.size} values")
                target[name] = values.reshape(zeros.shape)
        return state


def adam_step(state: AdamState, params: NetworkParams, grads: Dict[str, np.ndarray], lr: float,
              config: AdamConfig = AdamConfig()) -> Tuple[NetworkParams, AdamState]:
    """
    One bias-corrected Adam update

    Args:
        state: Moments and step count before the update
        params: Current parameters
        grads: Gradient per parameter name
        lr: Learning rate of this step
        config: beta1, beta2, epsilon

    Returns:
        (updated params, updated state); inputs are not modified
    """
    step = state.step + 1
    correction1 = 1.0 - config.beta1 ** step
    correction2 = 1.0 - config.beta2 ** step
    arrays, m, v = {}, {}, {}
    for name, value in params:
        grad = grads[name]
        if grad.shape != value.shape:
            raise DimensionError(f"Gradient for {name} has shape {grad.shape}, expected {value.shape}")
        m[name] = config.beta1 * state.m[name] + (1.0 - config.beta1) * grad
        v[name] = config.beta2 * state.v[name] + (1.0 - config.beta2) * grad * grad
        m_hat = m[name] / correction1
        v_hat = v[name] / correction2
        arrays[name] = value - lr * m_hat / (np.sqrt(v_hat) + config.epsilon)
    return params.replace(arrays), AdamState(step, m, v)


def steps_per_epoch(n_sequences: int, batch_size: int) -> int:
    return math.ceil(n_sequences / batch_size)
