# test_training.py
import copy
import math

import numpy as np

from tests.runner import expect_raises, run_tests
from autodiff.tape import Tape, grad_check
from core.grid import make_uniform_periodic_grid
from core.types import NodalState, TrajectoryDataset
from evaluation.metrics import relative_l2
from model.network import (
    NetworkDims,
    apply_model,
    conjugate_params_by_permutation,
    init_params,
    zero_params,
)
from solvers.exact import fourth_order_exact_step
from training.config import ScheduleConfig, TrainingConfig
from training.loss import loss_gradient, mse_loss, recurrent_loss
from training.optimizer import AdamState, adam_step, cyclic_lr, learning_rate, steps_per_epoch
from training.trainer import TrainHistory, train, train_with_state
from utils.errors import ConfigError, DimensionError, InvalidArgumentError, TrainingDivergedError


def _batch(n_sequences=6, n_states=4, size=8, seed=0):
    x = np.linspace(0.0, 2.0 * math.pi, size, endpoint=False)
    rng = np.random.default_rng(seed)
    amplitude = rng.uniform(-1.0, 1.0, size=(n_sequences, 1, 1))
    decay = np.exp(-0.1 * np.arange(n_states))[None, :, None]
    return amplitude * decay * np.sin(x)[None, None, :]


def _dataset(n_sequences=8, n_states=4, size=8, seed=0):
    grid = make_uniform_periodic_grid(size)
    return TrajectoryDataset.from_array(grid, _batch(n_sequences, n_states, size, seed), dt=0.1)


# ---- schedules ----

def test_cyclic_lr_shape():
    schedule = ScheduleConfig()
    assert math.isclose(cyclic_lr(0, schedule), 1e-3)
    assert math.isclose(cyclic_lr(1000, schedule), 1e-4)
    assert math.isclose(cyclic_lr(500, schedule), 1e-4 + 0.9e-3 * 0.99994 ** 500 * 0.5)
    assert math.isclose(cyclic_lr(2000, schedule), 1e-4 + 0.9e-3 * 0.99994 ** 2000)


def test_cyclic_lr_bounded():
    schedule = ScheduleConfig()
    for step in range(0, 20000, 37):
        lr = cyclic_lr(step, schedule)
        assert 1e-4 <= lr <= 1e-3
    expect_raises(InvalidArgumentError, cyclic_lr, -1, schedule)


def test_constant_schedule():
    schedule = ScheduleConfig(kind="constant", lr=5e-4)
    assert learning_rate(0, schedule) == learning_rate(12345, schedule) == 5e-4


def test_schedule_validation():
    expect_raises(ConfigError, ScheduleConfig, kind="cosine")
    expect_raises(ConfigError, ScheduleConfig, lr_min=1e-2, lr_max=1e-3)
    expect_raises(ConfigError, ScheduleConfig.from_dict, {"kind": "cyclic", "warmup": 10})


# ---- Adam ----

def test_adam_first_step_moves_by_lr():
    params = init_params(NetworkDims(4, 4, thickness=2), 0)
    grads = {name: np.full_like(value, 0.3) for name, value in params}
    grads["assembly.out.b"] = np.array([-2.0])
    updated, state = adam_step(AdamState.zeros(params), params, grads, 1e-2)
    assert state.step == 1
    moved = updated.flat() - params.flat()
    assert np.allclose(np.abs(moved), 1e-2, rtol=1e-6)
    assert np.isclose(updated["assembly.out.b"][0] - params["assembly.out.b"][0], 1e-2, rtol=1e-6)


def test_adam_does_not_modify_inputs():
    params = init_params(NetworkDims(4, 4, thickness=2), 0)
    before = params.sha256()
    state = AdamState.zeros(params)
    grads = {name: np.ones_like(value) for name, value in params}
    adam_step(state, params, grads, 1e-3)
    assert params.sha256() == before
    assert state.step == 0


def test_adam_state_round_trip():
    params = init_params(NetworkDims(4, 4, thickness=2), 0)
    grads = {name: np.random.default_rng(1).normal(size=value.shape) for name, value in params}
    _, state = adam_step(AdamState.zeros(params), params, grads, 1e-3)
    restored = AdamState.from_dict(state.to_dict(), params)
    assert restored.step == 1
    for name in state.m:
        assert np.array_equal(restored.m[name], state.m[name])
        assert np.array_equal(restored.v[name], state.v[name])
    broken = state.to_dict()
    broken["m"].pop("assembly.out.b")
    expect_raises(DimensionError, AdamState.from_dict, broken, params)


def test_steps_per_epoch():
    assert steps_per_epoch(10000, 50) == 200
    assert steps_per_epoch(10, 3) == 4


# ---- loss ----

def test_single_step_loss_is_mse():
    batch = _batch()
    params = zero_params(NetworkDims(8, 8))
    loss = recurrent_loss(params, batch, 1, Tape(record=False))
    assert float(loss.value) == mse_loss(batch[:, 0], batch[:, 1])


def test_multi_step_loss_sums_terms():
    batch = _batch()
    params = zero_params(NetworkDims(8, 8))
    loss = recurrent_loss(params, batch, 3, Tape(record=False))
    expected = sum(mse_loss(batch[:, 0], batch[:, n]) for n in range(1, 4))
    assert np.isclose(float(loss.value), expected, rtol=1e-14)


def test_loss_checks_batch():
    params = zero_params(NetworkDims(8, 8))
    expect_raises(DimensionError, recurrent_loss, params, _batch(n_states=2), 3, Tape())
    expect_raises(DimensionError, recurrent_loss, params, _batch(size=6), 1, Tape())
    expect_raises(DimensionError, recurrent_loss, params, np.zeros((4, 8)), 1, Tape())


def test_recurrent_loss_gradient():
    params = init_params(NetworkDims(8, 8, depth=2, thickness=3, assembly_depth=2), 3)
    batch = _batch()

    def loss(tape, nodes):
        return recurrent_loss(params, batch, 3, tape)

    assert grad_check(loss, dict(params), n_samples=150) < 1e-6


def test_recurrent_loss_gradient_over_shapes():
    checked = 0
    for n_nodes in (4, 16):
        for thickness in (1, 3):
            for n_steps in (1, 3):
                for seed in range(3):
                    dims = NetworkDims(n_nodes, n_nodes, thickness=thickness)
                    params = init_params(dims, seed)
                    batch = _batch(n_sequences=3, n_states=n_steps + 1, size=n_nodes, seed=seed)

                    def loss(tape, nodes):
                        return recurrent_loss(params, batch, n_steps, tape)

                    assert grad_check(loss, dict(params), n_samples=40, seed=seed) < 1e-6
                    checked += 1
    assert checked >= 20


def test_sharded_gradient_matches_single():
    params = init_params(NetworkDims(8, 8, thickness=3), 2)
    batch = _batch(n_sequences=7)
    loss, grads = loss_gradient(params, batch, 2)
    sharded_loss, sharded = loss_gradient(params, batch, 2, shards=3, threads=3)
    assert np.isclose(loss, sharded_loss, rtol=1e-13)
    for name in grads:
        assert np.allclose(grads[name], sharded[name], rtol=1e-12, atol=1e-14)


def test_loss_invariant_under_node_relabeling():
    dims = NetworkDims(8, 8, depth=2, thickness=3, assembly_depth=2)
    params = init_params(dims, 9)
    batch = _batch(n_sequences=5, n_states=4, seed=2) + 0.1 * _batch(n_sequences=5, n_states=4, seed=3) ** 2
    perm = np.random.default_rng(8).permutation(8)
    conjugated = conjugate_params_by_permutation(params, perm)
    loss = float(recurrent_loss(params, batch, 3, Tape(record=False)).value)
    relabeled = float(recurrent_loss(conjugated, batch[..., perm], 3, Tape(record=False)).value)
    assert abs(relabeled - loss) <= 1e-12 * loss


# ---- training loop ----

def test_training_reduces_loss():
    config = TrainingConfig(n_steps=2, epochs=30, batch_size=4, shuffle_seed=1,
                            schedule=ScheduleConfig(kind="constant", lr=1e-2))
    _, history = train(_dataset(), NetworkDims(8, 8, thickness=3), config, init_seed=5)
    assert len(history) == 30
    assert history.loss[-1] < history.loss[0]
    assert all(lr == 1e-2 for lr in history.lr)


def _fourth_order_dataset(grid, n_sequences=16, n_states=3, c=0.01, dt=0.05, seed=0):
    x = grid.nodes[:, 0]
    rng = np.random.default_rng(seed)
    blocks = []
    for _ in range(n_sequences):
        a, b = rng.uniform(-1.0, 1.0, size=(2, 3))
        state = NodalState(sum(a[n] * np.cos((n + 1) * x) + b[n] * np.sin((n + 1) * x) for n in range(3)))
        rows = [state.values]
        for _ in range(n_states - 1):
            state = fourth_order_exact_step(state, c, dt, grid)
            rows.append(state.values)
        blocks.append(np.array(rows))
    return TrajectoryDataset.from_array(grid, np.array(blocks), dt=dt)


def test_near_identity_start_learns_one_step():
    grid = make_uniform_periodic_grid(8)
    dataset = _fourth_order_dataset(grid)
    config = TrainingConfig(n_steps=2, epochs=30, batch_size=8, shuffle_seed=3,
                            schedule=ScheduleConfig(kind="constant", lr=1e-4))
    dims = NetworkDims(8, 8, thickness=3)
    near_identity, history = train(dataset, dims, config, init_seed=2, init_output_scale=0.01)
    glorot, glorot_history = train(dataset, dims, config, init_seed=2)
    assert history.loss[-1] < glorot_history.loss[-1]

    start = NodalState(np.sin(grid.nodes[:, 0]))
    reference = fourth_order_exact_step(start, 0.01, 0.05, grid).values
    error = relative_l2(apply_model(near_identity, start.values), reference)
    assert error < 0.1
    assert error < relative_l2(apply_model(glorot, start.values), reference)


def test_training_is_deterministic():
    config = TrainingConfig(n_steps=2, epochs=3, batch_size=3, shuffle_seed=4)
    dims = NetworkDims(8, 8, thickness=2)
    first, _ = train(_dataset(), dims, config, init_seed=1)
    second, _ = train(_dataset(), dims, config, init_seed=1, threads=2)
    assert first.sha256() == second.sha256()


def test_resume_matches_uninterrupted_run():
    dims = NetworkDims(8, 8, thickness=2)
    dataset = _dataset()
    full = train_with_state(dataset, dims, TrainingConfig(n_steps=2, epochs=4, batch_size=3), 2)

    half = TrainingConfig(n_steps=2, epochs=2, batch_size=3)
    first = train_with_state(dataset, dims, half, 2)
    state = AdamState.from_dict(first.adam_state.to_dict(), first.params)
    history = TrainHistory.from_dict(copy.deepcopy(first.history.to_dict()))
    resumed = train_with_state(dataset, dims, half, initial=(first.params, state, history))

    assert resumed.params.sha256() == full.params.sha256()
    assert resumed.history.epochs == [0, 1, 2, 3]
    assert resumed.history.loss == full.history.loss
    assert resumed.adam_state.step == full.adam_state.step


def test_zero_epochs_returns_initialization():
    dims = NetworkDims(8, 8, thickness=2)
    params, history = train(_dataset(), dims, TrainingConfig(epochs=0, batch_size=2), init_seed=6)
    assert params.sha256() == init_params(dims, 6).sha256()
    assert len(history) == 0


def test_divergence_keeps_last_finite_state():
    grid = make_uniform_periodic_grid(8)
    values = np.full((4, 3, 8), 1e160)
    values[:, 1] = -1e160
    dataset = TrajectoryDataset.from_array(grid, values, dt=0.1)
    config = TrainingConfig(n_steps=2, epochs=2, batch_size=2)
    error = expect_raises(TrainingDivergedError, train, dataset, NetworkDims(8, 8, thickness=2), config)
    assert error.step == 0
    assert error.params is not None and error.adam_state.step == 0
    assert error.exit_code == 4


def test_training_checks_dataset():
    dims = NetworkDims(8, 8, thickness=2)
    expect_raises(InvalidArgumentError, train, _dataset(n_states=2), dims, TrainingConfig(n_steps=3))
    expect_raises(InvalidArgumentError, train, _dataset(), dims, TrainingConfig(batch_size=20))
    expect_raises(DimensionError, train, _dataset(), NetworkDims(6, 6), TrainingConfig(batch_size=2))


def test_training_config_parsing():
    config = TrainingConfig.from_dict({
        "n_steps": 5, "epochs": 10, "batch_size": 50,
        "schedule": {"kind": "constant", "lr": 1e-3},
    })
    assert config.schedule.kind == "constant"
    assert TrainingConfig.from_dict(config.to_dict()) == config
    expect_raises(ConfigError, TrainingConfig.from_dict, {"n_L": 5})
    expect_raises(ConfigError, TrainingConfig.from_dict, {"n_steps": 0})


def test_history_round_trip():
    history = TrainHistory(config={"epochs": 2})
    history.append(0, 1.5, 1e-3)
    history.append(1, 0.5, 9e-4)
    history.wall_clock_seconds = 2.5
    assert "wall_clock_seconds" not in history.to_dict(include_timing=False)
    restored = TrainHistory.from_dict(history.to_dict())
    assert restored == history
    assert restored.summary()["final_loss"] == 0.5
    assert list(history.to_frame().columns) == ["epoch", "loss", "lr"]


if __name__ == "__main__":
    raise SystemExit(run_tests(globals()))
