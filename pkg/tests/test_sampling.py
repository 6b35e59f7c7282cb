# test_sampling.py
import math

import numpy as np

from tests.runner import expect_raises, run_tests
from core.grid import make_uniform_periodic_grid
from sampling.fields import FourierSeriesField, PiecewiseConstantField, evaluate_fourier_series
from sampling.grid2d import boundary_mask, gaussian_2d_ic, make_2d_unstructured_grid, sobol_2d
from sampling.rng import make_rng, substream
from sampling.samplers import (
    ComponentSampler,
    ConstantSampler,
    FourierCoeffSpec,
    FourierSampler,
    MixtureSampler,
    PiecewiseConstantSampler,
    build_sampler,
    draw_for_trajectory,
    sample_2d_sine_ic,
    sample_fourier_ic,
    sample_piecewise_constant_ic,
)
from sampling.validation import named_initial_condition
from solvers.pde import load_reference_coefficients
from utils.errors import ConfigError, InvalidArgumentError


def test_fourier_series_value():
    value = evaluate_fourier_series(1.0, [0.5], [0.25], math.pi / 2)
    assert np.isclose(value, 1.0 + 0.5 * math.cos(math.pi / 2) + 0.25)


def test_reference_coefficients_at_zero():
    alpha, kappa = load_reference_coefficients()
    assert np.isclose(alpha.evaluate(np.array([0.0]))[0], 1.04324)
    expected_kappa = 1e-3 + 5e-5 * (0.3707 - 0.9921 + 0.62524 + 0.4435 + 0.8355)
    assert np.isclose(kappa.evaluate(np.array([0.0]))[0], expected_kappa)


def test_advection_diffusion_coefficients_in_range():
    spec = FourierCoeffSpec.advection_diffusion()
    sampler = FourierSampler(spec)
    rng = make_rng(0)
    for _ in range(200):
        field = sampler.draw(rng)
        assert field.a0 == 0.0
        assert 1 <= field.a.size <= 10
        assert np.all(np.abs(field.a) <= 1.0) and np.all(np.abs(field.b) <= 1.0)


def test_burgers_coefficients_decay():
    sampler = FourierSampler(FourierCoeffSpec.burgers(10))
    rng = make_rng(1)
    n = np.arange(1, 11)
    for _ in range(200):
        field = sampler.draw(rng)
        assert -0.5 <= field.a0 <= 0.5
        assert field.a.size == 10
        assert np.all(np.abs(field.a) <= 1.0 / n) and np.all(np.abs(field.b) <= 1.0 / n)


def test_fourier_ic_is_seeded():
    grid = make_uniform_periodic_grid(32)
    spec = FourierCoeffSpec.advection_diffusion()
    first = sample_fourier_ic(spec, grid, substream(5, 3))
    second = sample_fourier_ic(spec, grid, substream(5, 3))
    other = sample_fourier_ic(spec, grid, substream(5, 4))
    assert first == second
    assert not np.array_equal(first.values, other.values)


def test_fourier_ic_rejects_2d_grid():
    grid = make_2d_unstructured_grid(make_rng(0), 20, 2)
    expect_raises(InvalidArgumentError, sample_fourier_ic, FourierCoeffSpec(), grid, make_rng(0))


def test_piecewise_constant_two_values():
    grid = make_uniform_periodic_grid(64, origin=-math.pi)
    rng = make_rng(2)
    for _ in range(50):
        state = sample_piecewise_constant_ic(grid, rng)
        assert len(np.unique(state.values)) <= 2
        assert np.all(np.abs(state.values) <= 1.0)


def test_piecewise_constant_wraps_coordinates():
    field = PiecewiseConstantField(1.0, -1.0, -0.5, 0.5)
    values = field.evaluate(np.array([0.0, 2.0 * math.pi, math.pi]))[0]
    assert np.array_equal(values, [1.0, 1.0, -1.0])


def test_sobol_first_point():
    points = sobol_2d(4)
    assert np.allclose(points[0], [0.5, 0.5])
    assert np.all((points >= 0.0) & (points < 1.0))


def test_unstructured_grid_layout():
    grid = make_2d_unstructured_grid(make_rng(6))
    assert grid.n_nodes == 236
    corners = grid.nodes[-4:]
    assert np.array_equal(np.abs(corners), np.ones((4, 2)))
    mask = boundary_mask(grid)
    assert mask.sum() == 4 * 8 + 4
    assert not np.any(mask[:200])
    interior = grid.nodes[:200]
    assert np.all(np.abs(interior) < 1.0)


def test_sine_2d_vanishes_on_boundary():
    grid = make_2d_unstructured_grid(make_rng(0), 30, 4)
    state = sample_2d_sine_ic(7, grid, make_rng(1))
    assert np.allclose(state.values[boundary_mask(grid)], 0.0, atol=1e-12)


def test_gaussian_peak():
    field = named_initial_condition("gaussian_2d")
    peak = field.evaluate(np.array([[0.2, 0.2]]))[0, 0]
    assert np.isclose(peak, 0.2 / (2.0 * math.pi * 0.18 * 0.18))
    assert np.isclose(peak, 0.982443, atol=1e-6)
    grid = make_2d_unstructured_grid(make_rng(0), 20, 2)
    assert gaussian_2d_ic(0.2, 0.2, 0.2, 0.18, 0.18, grid).n_nodes == grid.n_nodes


def test_component_sampler_concatenates():
    grid = make_uniform_periodic_grid(16)
    sampler = ComponentSampler([ConstantSampler(1.0), ConstantSampler(2.0)])
    state = sampler.sample(grid, make_rng(0))
    assert state.n_components == 2
    assert np.array_equal(state.values, np.r_[np.ones(16), 2.0 * np.ones(16)])


def test_mixture_uses_contiguous_blocks():
    sampler = MixtureSampler([(0.5, ConstantSampler(1.0)), (0.5, ConstantSampler(2.0))])
    values = [draw_for_trajectory(sampler, make_rng(j), j, 10).value for j in range(10)]
    assert values == [1.0] * 5 + [2.0] * 5


def test_build_sampler_from_config():
    sampler = build_sampler({"kind": "fourier", "preset": "burgers", "n_modes": 7})
    assert isinstance(sampler, FourierSampler)
    assert sampler.spec.n_modes == 7 and sampler.spec.coeff_decay == 1.0
    mixture = build_sampler({
        "kind": "mixture",
        "components": [
            {"weight": 1.0, "sampler": {"kind": "fourier", "preset": "burgers"}},
            {"weight": 1.0, "sampler": {"kind": "piecewise_constant"}},
        ],
    })
    assert isinstance(mixture.samplers[1], PiecewiseConstantSampler)


def test_build_sampler_rejects_unknown_keys():
    expect_raises(ConfigError, build_sampler, {"kind": "fourier", "modes": 3})
    expect_raises(ConfigError, build_sampler, {"kind": "brownian"})
    expect_raises(ConfigError, build_sampler, {"kind": "fourier", "preset": "heat"})


def test_named_initial_conditions():
    grid = make_uniform_periodic_grid(32)
    state = named_initial_condition("exp_sin2").on_grid(grid)
    x = grid.nodes[:, 0]
    assert np.allclose(state.values, np.exp(-np.sin(x) ** 2) - 0.5)
    wave = named_initial_condition("wave_exp").on_grid(grid)
    assert wave.n_components == 2
    assert np.allclose(wave.component(1), np.exp(np.cos(x)))
    expect_raises(InvalidArgumentError, named_initial_condition, "square")


def test_field_dimension_checked():
    grid = make_2d_unstructured_grid(make_rng(0), 20, 2)
    expect_raises(InvalidArgumentError, FourierSeriesField(0.0, [1.0], [0.0]).on_grid, grid)


if __name__ == "__main__":
    raise SystemExit(run_tests(globals()))
