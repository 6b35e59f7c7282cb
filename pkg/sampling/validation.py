"""Named out-of-sample initial conditions used for prediction and evaluation."""

import numpy as np

from sampling.fields import (
    ConstantField,
    FunctionField,
    Gaussian2DField,
    InitialField,
    StackedField,
)
from utils.errors import InvalidArgumentError


def _exp_sin2() -> InitialField:
    return FunctionField("exp_sin2", lambda x: np.exp(-np.sin(x) ** 2) - 0.5)


def _sin() -> InitialField:
    return FunctionField("sin", np.sin)


def _wave_exp() -> InitialField:
    return StackedField([
        FunctionField("exp_sin", lambda x: np.exp(np.sin(x))),
        FunctionField("exp_cos", lambda x: np.exp(np.cos(x))),
    ])


def _gaussian_2d() -> InitialField:
    return Gaussian2DField(amplitude=0.2, mu_x=0.2, mu_y=0.2, sigma_x=0.18, sigma_y=0.18)


NAMED_INITIAL_CONDITIONS = {
    "exp_sin2": _exp_sin2,
    "sin": _sin,
    "wave_exp": _wave_exp,
    "gaussian_2d": _gaussian_2d,
    "zero": lambda: ConstantField(0.0),
    "zero_2d": lambda: ConstantField(0.0, dim=2),
}


def named_initial_condition(name: str) -> InitialField:
    """
    Look up a named validation initial condition

    Args:
        name: One of NAMED_INITIAL_CONDITIONS

    Returns:
        Field that can be evaluated on any compatible grid
    """
    try:
        return NAMED_INITIAL_CONDITIONS[name]()
    except KeyError:
        raise InvalidArgumentError(
            f"Unknown initial condition '{name}' (known: {sorted(NAMED_INITIAL_CONDITIONS)})"
        ) from None
