import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stoeuler.core import DomainError, Grid
from stoeuler.heat import (
    heat_apply,
    heat_multiplier,
    kernel_convolve,
    kernel_dx_eval,
    kernel_eval,
    smoothing_constant_l1_linf,
    smoothing_exponent,
    spectral_derivative,
)

N = 256
X = Grid(N).centers


def random_field(seed, n=N, rows=None):
    rng = np.random.default_rng(seed)
    shape = (n,) if rows is None else (rows, n)
    return rng.normal(size=shape)


def test_constant_field_unchanged():
    f = np.full(N, 3.25)
    np.testing.assert_allclose(heat_apply(f, 0.7, 2.0), f, rtol=0, atol=1e-14)


def test_cosine_eigen_decay():
    f = np.cos(2 * np.pi * X)
    np.testing.assert_allclose(heat_apply(f, 1.0, 1.0), math.exp(-4 * math.pi**2) * f, atol=1e-15)


@pytest.mark.parametrize("mode", [1, 3, 17, 100])
def test_per_mode_decay(mode):
    f = np.sin(2 * np.pi * mode * X)
    nu_t = 1e-4
    expected = math.exp(-4 * math.pi**2 * mode**2 * nu_t) * f
    np.testing.assert_allclose(heat_apply(f, 1.0, nu_t), expected, atol=1e-12)


def test_superposition():
    a, b = np.cos(2 * np.pi * X), np.sin(6 * np.pi * X)
    out = heat_apply(a + 2 * b, 0.01, 0.3)
    np.testing.assert_allclose(out, heat_apply(a, 0.01, 0.3) + 2 * heat_apply(b, 0.01, 0.3), atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(s=st.floats(0.0, 0.05), t=st.floats(0.0, 0.05), seed=st.integers(0, 2**31))
def test_semigroup(s, t, seed):
    f = random_field(seed)
    two = heat_apply(heat_apply(f, 1.0, s), 1.0, t)
    np.testing.assert_allclose(two, heat_apply(f, 1.0, s + t), atol=1e-12)


def test_mean_preserved_and_zero_time_identity():
    f = random_field(5)
    assert heat_apply(f, 1.0, 0.2).mean() == pytest.approx(f.mean(), abs=1e-15)
    np.testing.assert_allclose(heat_apply(f, 1.0, 0.0), f, atol=1e-14)


def test_per_row_step_lengths():
    f = random_field(6, rows=3)
    dt = np.array([0.0, 1e-3, 1e-2])
    out = heat_apply(f, 2.0, dt)
    for i in range(3):
        np.testing.assert_array_equal(out[i], heat_apply(f[i], 2.0, dt[i]))


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        heat_apply(np.zeros(8), 1.0, -1.0)


@pytest.mark.parametrize("t", [1e-3, 1e-2, 1e-1])
def test_maximum_principle(t):
    for seed in range(20):
        f = random_field(seed)
        out = heat_apply(f, 1.0, t)
        assert out.min() >= f.min() - 1e-12
        assert out.max() <= f.max() + 1e-12


def test_spectral_kernel_has_negative_lobes_for_tiny_times():
    # the truncated spectrum of a grid delta rings when nu t << dx^2
    delta = np.zeros(128)
    delta[0] = 128.0
    assert heat_apply(delta, 1.0, 3e-6).min() < -1e-3
    assert heat_apply(delta, 1.0, 1e-3).min() > -1e-12


@pytest.mark.parametrize("t", [1e-3, 1e-2, 1e-1])
def test_spectral_matches_kernel_convolution(t):
    for seed in range(5):
        f = random_field(100 + seed)
        np.testing.assert_allclose(heat_apply(f, 1.0, t), kernel_convolve(f, t), atol=1e-10)


def test_kernel_mass_and_positivity():
    x = (np.arange(20000) + 0.5) / 20000
    for t in (1e-4, 1e-2, 0.3):
        k = kernel_eval(t, x)
        assert np.all(k > 0)
        assert k.mean() == pytest.approx(1.0, rel=1e-10)


def test_kernel_flattens_for_large_time():
    np.testing.assert_allclose(kernel_eval(1.0, np.linspace(0, 1, 33)), 1.0, atol=1e-12)


def test_kernel_periodic_and_symmetric():
    x = np.linspace(0, 1, 17)
    np.testing.assert_allclose(kernel_eval(0.01, x), kernel_eval(0.01, x + 3.0), rtol=1e-14)
    np.testing.assert_allclose(kernel_eval(0.01, x), kernel_eval(0.01, -x), rtol=1e-14)


def test_kernel_requires_positive_time():
    with pytest.raises(DomainError):
        kernel_eval(0.0, 0.5)
    with pytest.raises(DomainError):
        kernel_dx_eval(-1.0, 0.5)


def test_kernel_derivative_matches_finite_difference():
    x = np.linspace(0.05, 0.95, 19)
    h = 1e-6
    fd = (kernel_eval(0.01, x + h) - kernel_eval(0.01, x - h)) / (2 * h)
    np.testing.assert_allclose(kernel_dx_eval(0.01, x), fd, rtol=1e-6, atol=1e-6)


def test_spectral_derivative_of_sine():
    np.testing.assert_allclose(spectral_derivative(np.sin(2 * np.pi * 3 * X)), 6 * np.pi * np.cos(6 * np.pi * X), atol=1e-10)


def test_smoothing_exponent_values():
    assert smoothing_exponent(1, math.inf, j=1) == 1.0
    assert smoothing_exponent(math.inf, math.inf, j=1) == 0.5
    assert smoothing_exponent(2, 2) == 0.0
    with pytest.raises(ValueError):
        smoothing_exponent(4, 2)


def test_sharp_constant_limit():
    # t sup|d_x K_t| -> exp(-1/2) / sqrt(8 pi) as t -> 0
    assert smoothing_constant_l1_linf(1e-5) == pytest.approx(math.exp(-0.5) / math.sqrt(8 * math.pi), rel=1e-6)


TIMES = np.geomspace(1e-3, 1.0, 10)


def _ratios(f, times):
    l1 = np.abs(f).sum() / f.size
    return np.array([np.abs(spectral_derivative(heat_apply(f, 1.0, t))).max() / l1 for t in times])


def test_l1_to_linf_derivative_bound_scales_like_inverse_time():
    # ||d_x S(t) f||_inf <= C t^-1 ||f||_1 with C the sharp constant
    c_sharp = max(smoothing_constant_l1_linf(t) for t in TIMES)
    for seed in range(10):
        f = random_field(200 + seed)
        scaled = _ratios(f, TIMES) * TIMES
        assert np.all(scaled <= c_sharp * (1 + 1e-9))
    # a concentrated bump nearly saturates it
    bump = np.exp(-((X - 0.5) ** 2) / (2 * 0.002**2))
    scaled = _ratios(bump, TIMES[:1]) * TIMES[:1]
    assert scaled[0] > 0.8 * smoothing_constant_l1_linf(TIMES[0])


def test_l1_to_linf_derivative_bound_is_not_inverse_sqrt_time():
    # with t^(-1/2) no constant works uniformly: the fitted constant drifts
    bump = np.exp(-((X - 0.5) ** 2) / (2 * 0.002**2))
    scaled = _ratios(bump, TIMES) * np.sqrt(TIMES)
    assert scaled[0] > 5 * scaled[5]


def test_linf_to_linf_derivative_bound_scales_like_inverse_sqrt_time():
    # ||d_x S(t) f||_inf <= t^-1/2 / sqrt(pi) ||f||_inf
    for seed in range(10):
        f = random_field(300 + seed)
        sup = np.abs(f).max()
        for t in TIMES:
            d = np.abs(spectral_derivative(heat_apply(f, 1.0, t))).max()
            assert d * math.sqrt(t) <= sup / math.sqrt(math.pi) * (1 + 1e-9)


def test_multiplier_shape():
    assert heat_multiplier(16, np.array([0.0, 1.0])).shape == (2, 9)
