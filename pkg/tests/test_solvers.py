# test_solvers.py
import math

import numpy as np

from tests.runner import expect_raises, run_tests
from core.grid import make_uniform_periodic_grid, perturb_and_permute_grid
from core.types import NodalState
from sampling.fields import FunctionField, PiecewiseConstantField, SineSeries2DField
from sampling.grid2d import make_2d_unstructured_grid
from sampling.rng import make_rng
from sampling.samplers import FourierCoeffSpec, FourierSampler
from solvers.advdiff import advdiff1d_step_cn, clear_factor_cache
from solvers.advdiff2d import advdiff2d_reference
from solvers.burgers import (
    inviscid_burgers_step,
    inviscid_burgers_values,
    viscous_burgers_step,
)
from solvers.exact import fourth_order_exact_step, integro_differential_step, wave_system_exact
from solvers.pde import (
    AdvDiff2D,
    AdvectionDiffusion1D,
    FixedFourierSeries,
    FourthOrder,
    InviscidBurgers,
    WaveSystem,
    pde_from_dict,
)
from solvers.spectral import SpectralOperator1D, spectral_derivative
from solvers.trajectory import Stepper, generate_dataset, solve_trajectory
from utils.errors import ConfigError, InvalidArgumentError


# ---- spectral ----

def test_spectral_derivative_of_sine():
    grid = make_uniform_periodic_grid(32)
    x = grid.nodes[:, 0]
    derivative = spectral_derivative(NodalState(np.sin(3 * x)), grid, order=1)
    assert np.allclose(derivative.values, 3 * np.cos(3 * x), atol=1e-12)
    second = spectral_derivative(NodalState(np.sin(3 * x)), grid, order=2)
    assert np.allclose(second.values, -9 * np.sin(3 * x), atol=1e-11)


def test_spectral_derivative_components():
    grid = make_uniform_periodic_grid(16)
    x = grid.nodes[:, 0]
    state = NodalState(np.r_[np.sin(x), np.cos(x)], n_components=2)
    derivative = spectral_derivative(state, grid)
    assert np.allclose(derivative.component(0), np.cos(x), atol=1e-12)
    assert np.allclose(derivative.component(1), -np.sin(x), atol=1e-12)


def test_differentiation_matrix_matches_fft():
    operator = SpectralOperator1D(24)
    values = np.random.default_rng(0).normal(size=24)
    assert np.allclose(operator.differentiation_matrix(2) @ values, operator.derivative(values, 2))


def test_spectral_interpolation_off_grid():
    grid = make_uniform_periodic_grid(32, origin=-math.pi)
    operator = SpectralOperator1D.for_grid(grid)
    x = grid.nodes[:, 0]
    values = np.exp(np.sin(x))
    points = np.array([-3.0, -0.123, 0.5, 2.9])
    # exp(sin x) is not band-limited but its modes decay fast
    assert np.allclose(operator.interpolate(values, points), np.exp(np.sin(points)), atol=1e-9)


def test_spectral_needs_uniform_even_grid():
    odd = make_uniform_periodic_grid(15)
    expect_raises(InvalidArgumentError, spectral_derivative, NodalState(np.zeros(15)), odd)
    permuted = perturb_and_permute_grid(make_uniform_periodic_grid(16), 0.0, seed=1)
    expect_raises(InvalidArgumentError, spectral_derivative, NodalState(np.zeros(16)), permuted)


def test_spectral_forward_inverse_round_trip():
    operator = SpectralOperator1D(32, length=1.0, origin=-0.5)
    values = np.random.default_rng(4).normal(size=(3, 32))
    back = operator.inverse(operator.forward(values))
    assert np.max(np.abs(back - values)) < 1e-14 * 32


# ---- advection-diffusion, Crank-Nicolson ----

def test_cn_amplification_on_eigenmode():
    clear_factor_cache()
    kappa, n, dt = 0.01, 3, 0.1
    spec = AdvectionDiffusion1D(alpha=FixedFourierSeries(0.0), kappa=FixedFourierSeries(kappa))
    grid = make_uniform_periodic_grid(32)
    x = grid.nodes[:, 0]
    out = advdiff1d_step_cn(NodalState(np.sin(n * x)), spec, dt, grid)
    lam = kappa * n * n * dt
    factor = (1 - lam / 2) / (1 + lam / 2)
    assert np.allclose(out.values, factor * np.sin(n * x), atol=1e-12)
    assert np.isclose(out.time, dt)


def test_cn_constant_advection_shifts():
    spec = AdvectionDiffusion1D(alpha=FixedFourierSeries(1.0), kappa=FixedFourierSeries(1e-12))
    grid = make_uniform_periodic_grid(32)
    x = grid.nodes[:, 0]
    state = NodalState(np.sin(x))
    for _ in range(100):
        state = advdiff1d_step_cn(state, spec, 0.001, grid)
    assert np.allclose(state.values, np.sin(x - 0.1), atol=1e-6)


def test_cn_second_order_in_time():
    spec = pde_from_dict({"kind": "advection_diffusion_1d", "coefficients": "reference"})
    grid = make_uniform_periodic_grid(32)
    x = grid.nodes[:, 0]

    def run(steps: int) -> np.ndarray:
        state = NodalState(np.exp(-np.sin(x) ** 2) - 0.5)
        for _ in range(steps):
            state = advdiff1d_step_cn(state, spec, 0.4 / steps, grid)
        return state.values

    coarse, medium, fine = run(20), run(40), run(80)
    order = math.log2(np.linalg.norm(coarse - medium) / np.linalg.norm(medium - fine))
    assert 1.8 <= order <= 2.2


def test_cn_rejects_negative_kappa():
    spec = AdvectionDiffusion1D(kappa=FixedFourierSeries(-1e-3))
    grid = make_uniform_periodic_grid(16)
    expect_raises(InvalidArgumentError, advdiff1d_step_cn, NodalState(np.zeros(16)), spec, 0.01, grid)


def test_reference_coefficients_step():
    spec = pde_from_dict({"kind": "advection_diffusion_1d", "coefficients": "reference"})
    grid = make_uniform_periodic_grid(50)
    x = grid.nodes[:, 0]
    state = NodalState(np.exp(-np.sin(x) ** 2) - 0.5)
    out = advdiff1d_step_cn(state, spec, 0.02, grid)
    assert np.all(np.isfinite(out.values))
    # conservative form keeps the mean
    assert np.isclose(out.values.mean(), state.values.mean(), atol=1e-12)


# ---- exact integrators ----

def test_fourth_order_single_mode():
    grid = make_uniform_periodic_grid(32)
    x = grid.nodes[:, 0]
    out = fourth_order_exact_step(NodalState(np.sin(x)), 0.01, 0.01, grid)
    assert np.allclose(out.values, math.exp(-1e-4) * np.sin(x), atol=1e-14)


def test_fourth_order_mode_decay():
    grid = make_uniform_periodic_grid(32)
    x = grid.nodes[:, 0]
    c, dt, n = 0.01, 0.05, 3
    out = fourth_order_exact_step(NodalState(np.cos(n * x)), c, dt, grid)
    assert np.max(np.abs(out.values - math.exp(-c * n ** 4 * dt) * np.cos(n * x))) < 1e-12


def test_wave_exact_solution():
    grid = make_uniform_periodic_grid(32)
    x = grid.nodes[:, 0]
    t = 0.7
    u1, u2 = wave_system_exact(NodalState(np.sin(x)), NodalState(np.zeros(32)), t, grid)
    assert np.max(np.abs(u1.values - np.sin(x) * math.cos(t))) < 1e-12
    assert np.max(np.abs(u2.values - np.cos(x) * math.sin(t))) < 1e-12
    assert u1.time == t


def test_integro_mean_mode():
    grid = make_uniform_periodic_grid(16)
    out = integro_differential_step(NodalState(np.ones(16)), 0.3, -0.5, 0.1, grid)
    assert np.allclose(out.values, math.exp(-0.05))


def test_fourth_order_step_commutes_with_derivative():
    grid = make_uniform_periodic_grid(32)
    state = NodalState(np.random.default_rng(6).normal(size=32))
    c, dt = 0.01, 0.05
    stepped_then_derived = spectral_derivative(fourth_order_exact_step(state, c, dt, grid), grid)
    derived_then_stepped = fourth_order_exact_step(spectral_derivative(state, grid), c, dt, grid)
    scale = np.max(np.abs(derived_then_stepped.values))
    assert np.max(np.abs(stepped_then_derived.values - derived_then_stepped.values)) < 1e-12 * scale


def test_wave_exact_satisfies_system():
    grid = make_uniform_periodic_grid(32)
    x = grid.nodes[:, 0]
    u1, u2 = NodalState(np.sin(x)), NodalState(np.cos(x))
    t, dt = 0.7, 1e-4
    now = wave_system_exact(u1, u2, t, grid)
    ahead = wave_system_exact(u1, u2, t + dt, grid)
    behind = wave_system_exact(u1, u2, t - dt, grid)
    # u1_t = u2_x and u2_t = u1_x
    for component, coupled in ((0, 1), (1, 0)):
        rate = (ahead[component].values - behind[component].values) / (2.0 * dt)
        flux = spectral_derivative(now[coupled], grid).values
        assert np.max(np.abs(rate - flux)) < 1e-8


# ---- Burgers ----

def test_viscous_energy_decays():
    grid = make_uniform_periodic_grid(32, origin=-math.pi)
    x = grid.nodes[:, 0]
    state = NodalState(np.sin(x) + 0.3 * np.cos(2 * x))
    energy = np.sum(state.values ** 2)
    for _ in range(20):
        state = viscous_burgers_step(state, 0.1, 0.0025, grid)
        new_energy = np.sum(state.values ** 2)
        assert new_energy <= energy + 1e-12
        energy = new_energy


def test_viscous_fourth_order_convergence():
    grid = make_uniform_periodic_grid(32, origin=-math.pi)
    x = grid.nodes[:, 0]

    def run(steps: int) -> np.ndarray:
        state = NodalState(np.sin(x))
        dt = 0.2 / steps
        for _ in range(steps):
            state = viscous_burgers_step(state, 0.1, dt, grid)
        return state.values

    coarse, medium, fine = run(10), run(20), run(40)
    order = math.log2(np.linalg.norm(coarse - medium) / np.linalg.norm(medium - fine))
    assert 3.7 <= order <= 4.3


def test_inviscid_shock_speed():
    n = 200
    grid = make_uniform_periodic_grid(n, origin=-math.pi)
    h = 2.0 * math.pi / n
    x = grid.nodes[:, 0]
    values = PiecewiseConstantField(1.0, 0.0, -1.0, 0.0).evaluate(x)[0]
    jump = x[np.flatnonzero(values > 0.5).max()] + 0.5 * h
    mass = values.sum()
    for _ in range(100):
        values = inviscid_burgers_values(values, 0.01, h)
    assert np.isclose(values.sum(), mass, rtol=0, atol=1e-10)
    # first downward crossing of 1/2 to the right of the initial jump
    right = np.flatnonzero((x > jump - 0.25) & (values < 0.5))[0]
    x0, x1 = x[right - 1], x[right]
    v0, v1 = values[right - 1], values[right]
    crossing = x0 + (v0 - 0.5) / (v0 - v1) * (x1 - x0)
    assert abs(crossing - (jump + 0.5)) <= h


def test_inviscid_conserves_mean():
    n = 128
    h = 2.0 * math.pi / n
    values = np.sin(make_uniform_periodic_grid(n, origin=-math.pi).nodes[:, 0]) + 0.25
    mean = values.mean()
    for _ in range(1000):
        values = inviscid_burgers_values(values, 0.015, h)
        assert abs(values.mean() - mean) < 1e-13
        mean = values.mean()


def test_inviscid_shock_forms():
    n = 128
    h = 2.0 * math.pi / n
    values = np.sin(make_uniform_periodic_grid(n, origin=-math.pi).nodes[:, 0])

    def steepest(v: np.ndarray) -> float:
        return float(np.max(np.abs(np.roll(v, -1) - v)) / h)

    initial = steepest(values)
    for _ in range(100):
        values = inviscid_burgers_values(values, 0.02, h)
    assert steepest(values) > 10.0 * initial


def test_inviscid_cfl_violation():
    grid = make_uniform_periodic_grid(32, origin=-math.pi)
    state = NodalState(np.ones(32))
    expect_raises(InvalidArgumentError, inviscid_burgers_step, state, 1.0, grid)


def test_inviscid_stepper_substeps():
    grid = make_uniform_periodic_grid(32, origin=-math.pi)
    stepper = Stepper(InviscidBurgers(), grid, 0.1)
    out = stepper.advance(np.sin(grid.nodes[:, 0]))
    assert stepper.max_substeps >= 2
    assert np.all(np.isfinite(out))


def test_inviscid_no_new_extrema_from_piecewise_constant():
    n = 128
    h = 2.0 * math.pi / n
    x = make_uniform_periodic_grid(n, origin=-math.pi).nodes[:, 0]
    values = PiecewiseConstantField(1.0, -0.5, -1.0, 1.0).evaluate(x)[0]
    high, low = values.max(), values.min()
    slack = 5e-3 * (high - low)
    for _ in range(150):
        values = inviscid_burgers_values(values, 0.01, h)
        assert values.max() <= high + slack
        assert values.min() >= low - slack


def test_inviscid_smooth_data_stays_bounded():
    n = 128
    h = 2.0 * math.pi / n
    values = np.sin(make_uniform_periodic_grid(n, origin=-math.pi).nodes[:, 0])
    # t = 0.6 is before the shock forms at t = 1
    for _ in range(40):
        values = inviscid_burgers_values(values, 0.015, h)
        assert values.max() <= 1.0 + 1e-6
        assert values.min() >= -1.0 - 1e-6


# ---- 2D reference ----

def test_2d_pure_diffusion_rate():
    kappa, t = 0.05, 1.0
    spec = AdvDiff2D(kappa=kappa, velocity_scale=0.0, fine_grid=65)
    grid = make_2d_unstructured_grid(make_rng(0), 40, 4)
    field = SineSeries2DField(np.array([[1.0]]))
    result = advdiff2d_reference(field, spec, t, 0.01, grid, output_times=[0.0, t])
    assert result.values.shape == (2, grid.n_nodes)
    assert result.interpolation_error < 1e-4
    assert not result.warnings
    mask = np.abs(result.values[0]) > 0.1
    observed = -math.log(np.median(result.values[1][mask] / result.values[0][mask])) / t
    expected = kappa * math.pi ** 2 / 2.0
    assert abs(observed - expected) / expected < 0.02


def test_2d_accuracy_warning():
    spec = AdvDiff2D(fine_grid=17)
    grid = make_2d_unstructured_grid(make_rng(0), 20, 2)
    result = advdiff2d_reference(SineSeries2DField(np.array([[1.0]])), spec, 0.1, 0.1, grid)
    assert result.warnings


def test_2d_output_times_multiple_of_dt():
    spec = AdvDiff2D(fine_grid=17)
    grid = make_2d_unstructured_grid(make_rng(0), 20, 2)
    field = SineSeries2DField(np.array([[1.0]]))
    expect_raises(InvalidArgumentError, advdiff2d_reference, field, spec, 0.1, 0.03, grid)


# ---- trajectories and datasets ----

def test_wave_trajectory_matches_exact():
    grid = make_uniform_periodic_grid(32)
    x = grid.nodes[:, 0]
    ic = NodalState(np.r_[np.exp(np.sin(x)), np.exp(np.cos(x))], n_components=2)
    seq = solve_trajectory(WaveSystem(), ic, grid, 0.05, 10)
    assert seq.n_steps == 10
    for state in seq.states:
        u1, u2 = wave_system_exact(NodalState(ic.component(0)), NodalState(ic.component(1)),
                                   state.time, grid)
        assert np.max(np.abs(state.values - np.r_[u1.values, u2.values])) < 1e-10


def test_nonuniform_grid_uses_oracle():
    base = make_uniform_periodic_grid(20)
    grid = perturb_and_permute_grid(base, 0.25, seed=3)
    c, dt = 0.01, 0.1
    seq = solve_trajectory(FourthOrder(c), FunctionField("sin", np.sin), grid, dt, 5)
    x = grid.nodes[:, 0]
    for k, state in enumerate(seq.states):
        assert np.allclose(state.values, math.exp(-c * k * dt) * np.sin(x), atol=1e-12)


def test_nonuniform_grid_needs_field():
    grid = perturb_and_permute_grid(make_uniform_periodic_grid(20), 0.25, seed=3)
    expect_raises(InvalidArgumentError, solve_trajectory, FourthOrder(), NodalState(np.zeros(20)), grid, 0.1, 2)


def test_substeps_from_max_dt():
    grid = make_uniform_periodic_grid(16)
    assert Stepper(AdvectionDiffusion1D(), grid, 0.02).substeps == 4
    assert Stepper(FourthOrder(), grid, 0.02).substeps == 1


def test_dataset_independent_of_threads():
    grid = make_uniform_periodic_grid(16)
    sampler = FourierSampler(FourierCoeffSpec.burgers(5))
    serial = generate_dataset(FourthOrder(), sampler, grid, 6, 3, 0.01, seed=9, threads=1)
    threaded = generate_dataset(FourthOrder(), sampler, grid, 6, 3, 0.01, seed=9, threads=3)
    assert serial == threaded
    assert serial.metadata["n_sequences"] == 6
    assert serial.metadata["pde"]["kind"] == "fourth_order"
    assert serial.metadata["oracle_grid"] is None


def test_dataset_rejects_dimension_mismatch():
    grid = make_2d_unstructured_grid(make_rng(0), 20, 2)
    sampler = FourierSampler(FourierCoeffSpec())
    expect_raises(InvalidArgumentError, generate_dataset, FourthOrder(), sampler, grid, 2, 1, 0.1, 0)


def test_pde_from_dict():
    spec = pde_from_dict({"kind": "viscous_burgers", "nu": 0.05})
    assert spec.nu == 0.05
    assert pde_from_dict(spec.to_dict()) == spec
    expect_raises(ConfigError, pde_from_dict, {"kind": "viscous_burgers", "viscosity": 0.1})
    expect_raises(ConfigError, pde_from_dict, {"kind": "navier_stokes"})
    expect_raises(ConfigError, pde_from_dict, {"kind": "fourth_order", "c": -1.0})


if __name__ == "__main__":
    raise SystemExit(run_tests(globals()))
