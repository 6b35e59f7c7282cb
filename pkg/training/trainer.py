import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from typing_extensions import Self

from core.types import TrajectoryDataset
from model.network import NetworkDims, NetworkParams, init_params
from sampling.rng import substream
from training.config import TrainingConfig
from training.loss import loss_gradient
from training.optimizer import AdamState, adam_step, learning_rate, steps_per_epoch
from utils.errors import DimensionError, InvalidArgumentError, NumericalError, TrainingDivergedError

logger = logging.getLogger(__name__)


@dataclass
class TrainHistory:
    """Per-epoch mean loss and learning rate, plus the config echo"""

    epochs: List[int] = field(default_factory=list)
    loss: List[float] = field(default_factory=list)
    lr: List[float] = field(default_factory=list)
    wall_clock_seconds: float = 0.0
    config: Dict[str, Any] = field(default_factory=dict)

    def append(self, epoch: int, loss: float, lr: float):
        self.epochs.append(epoch)
        self.loss.append(loss)
        self.lr.append(lr)

    def __len__(self) -> int:
        return len(self.epochs)

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        data = {"epochs": list(self.epochs), "loss": list(self.loss), "lr": list(self.lr),
                "config": self.config}
        if include_timing:
            data["wall_clock_seconds"] = self.wall_clock_seconds
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Self:
        return cls(
            epochs=[int(e) for e in data.get("epochs", [])],
            loss=[float(v) for v in data.get("loss", [])],
            lr=[float(v) for v in data.get("lr", [])],
            wall_clock_seconds=float(data.get("wall_clock_seconds", 0.0)),
            config=dict(data.get("config", {})),
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"epoch": self.epochs, "loss": self.loss, "lr": self.lr})

    def to_csv(self, path: str):
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    def summary(self) -> Dict[str, Any]:
        return {
            "epochs": len(self),
            "first_loss": self.loss[0] if self.loss else None,
            "final_loss": self.loss[-1] if self.loss else None,
            "final_lr": self.lr[-1] if self.lr else None,
        }


@dataclass
class TrainResult:
    params: NetworkParams
    history: TrainHistory
    adam_state: AdamState


def training_array(dataset: TrajectoryDataset, dims: NetworkDims, config: TrainingConfig) -> np.ndarray:
    """(M, n_L+1, N*L) sequences cut to the configured recurrence length"""
    if config.n_steps > dataset.n_steps:
        raise InvalidArgumentError(
            f"Training n_L={config.n_steps} exceeds the dataset's n_L={dataset.n_steps}"
        )
    if config.batch_size > dataset.n_sequences:
        raise InvalidArgumentError(
            f"batch_size {config.batch_size} exceeds the {dataset.n_sequences} sequences"
        )
    if dataset.state_size != dims.n_inputs:
        raise DimensionError(
            f"Dataset states have {dataset.state_size} values, network expects {dims.n_inputs}"
        )
    return dataset.as_array()[:, :config.n_steps + 1]


def train_with_state(dataset: TrajectoryDataset, dims: NetworkDims, config: TrainingConfig,
                     init_seed: int = 0,
                     init_output_scale: float = 1.0,
                     initial: Optional[Tuple[NetworkParams, AdamState, TrainHistory]] = None,
                     on_epoch: Optional[Callable[[int, float, float], None]] = None,
                     threads: Optional[int] = None) -> TrainResult:
    """
    Mini-batch Adam over the recurrent loss

    Args:
        dataset: Training trajectories
        dims: Network shape
        config: Training settings
        init_seed: Seed of the initial parameters (ignored when resuming)
        init_output_scale: Scale of the final assembly weights at initialization
        initial: (params, optimizer state, history) to resume from
        on_epoch: Called with (epoch, mean loss, lr) after every epoch
        threads: Worker threads for sharded gradients

    Returns:
        TrainResult with final parameters, history and optimizer state
    """
    data = training_array(dataset, dims, config)
    if initial is None:
        params = init_params(dims, init_seed, init_output_scale)
        state = AdamState.zeros(params)
        history = TrainHistory(config=config.to_dict())
    else:
        params, state, history = initial
        if params.dims != dims:
            raise DimensionError(f"Checkpoint dims {params.dims} do not match {dims}")
        history.config = config.to_dict()

    n_sequences = data.shape[0]
    batches = steps_per_epoch(n_sequences, config.batch_size)
    first_epoch = len(history)
    logger.info(
        f"Training {config.epochs} epochs x {batches} batches "
        f"(M={n_sequences}, n_L={config.n_steps}, resume at step {state.step})"
    )

    started = time.perf_counter()
    for epoch in range(first_epoch, first_epoch + config.epochs):
        order = substream(config.shuffle_seed, epoch).permutation(n_sequences)
        total = 0.0
        lr = learning_rate(state.step, config.schedule)
        for b in range(batches):
            indices = order[b * config.batch_size:(b + 1) * config.batch_size]
            try:
                loss, grads = loss_gradient(params, data[indices], config.n_steps,
                                            config.shards, threads)
            except NumericalError as exc:
                loss = math.nan
                logger.error(f"Non-finite values at step {state.step}: {exc}")
            if not math.isfinite(loss):
                history.wall_clock_seconds += time.perf_counter() - started
                raise TrainingDivergedError(
                    f"Training loss became non-finite at epoch {epoch}, step {state.step}",
                    params=params, adam_state=state, history=history, step=state.step,
                )
            lr = learning_rate(state.step, config.schedule)
            params, state = adam_step(state, params, grads, lr, config.adam)
            total += loss

        mean_loss = total / batches
        history.append(epoch, mean_loss, lr)
        if on_epoch is not None:
            on_epoch(epoch, mean_loss, lr)
        if (epoch - first_epoch) % config.log_every == 0:
            logger.info(f"epoch {epoch} loss {mean_loss:.6e} lr {lr:.3e}")

    history.wall_clock_seconds += time.perf_counter() - started
    return TrainResult(params, history, state)


def train(dataset: TrajectoryDataset, dims: NetworkDims, config: TrainingConfig,
          init_seed: int = 0, **kwargs) -> Tuple[NetworkParams, TrainHistory]:
    result = train_with_state(dataset, dims, config, init_seed, **kwargs)
    return result.params, result.history
