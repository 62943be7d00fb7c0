import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stoeuler.core import GasLaw, Grid, riemann_invariants
from stoeuler.noise import (
    BLOCK_STEPS,
    GENERIC,
    SW_HEIGHT,
    SW_TOPOGRAPHY,
    IncrementSource,
    g_squared,
    generic_multiplicative,
    growth_bound,
    ito_rate_density,
    localize,
    sample_increments,
    smoothstep_cutoff,
    sw_height_modes,
    sw_topography_modes,
    zero_noise,
)

X = Grid(64).centers
SW = GasLaw.shallow_water(2.0)


def test_topography_modes_shape_and_amplitude():
    model = sw_topography_modes(2.0, [1.0] * 5, 5)
    assert model.kind == SW_TOPOGRAPHY
    assert model.n_modes == 10
    prof = model.profiles(X)
    for k in range(1, 6):
        amp = np.hypot(prof[2 * k - 2], prof[2 * k - 1])
        np.testing.assert_allclose(amp, 4 * math.pi * k, rtol=1e-13)


def test_topography_modes_are_minus_g_h_grad_z():
    # sum_k sigma_k dbeta_k should equal -g h d_x Z for the same increments
    g, sig = 2.0, [0.3, 1.2, 0.7]
    model = sw_topography_modes(g, sig, 3)
    rng = np.random.default_rng(1)
    db = rng.normal(size=6)
    h = 1.3
    forcing = np.tensordot(db, model.coefficients(X, np.full_like(X, h), np.zeros_like(X)), axes=1)
    k = np.arange(1, 4)[:, None]
    s = np.array(sig)[:, None]
    dzdx = np.sum(s * 2 * np.pi * k * (-np.sin(2 * np.pi * k * X) * db[0::2, None]
                                        + np.cos(2 * np.pi * k * X) * db[1::2, None]), axis=0)
    np.testing.assert_allclose(forcing, -g * h * dzdx, atol=1e-12)


def test_topography_g_squared_is_spatially_constant():
    model = sw_topography_modes(2.0, [1.0] * 5, 5)
    g2 = g_squared(model, X, np.ones_like(X), np.zeros_like(X))
    np.testing.assert_allclose(g2, 16 * math.pi**2 * 55, rtol=1e-12)


def test_height_modes():
    model = sw_height_modes(2.0, [1.0] * 5, 5)
    assert model.kind == SW_HEIGHT and model.n_modes == 10
    h = np.full_like(X, 0.8)
    g2 = g_squared(model, X, h, np.zeros_like(X))
    np.testing.assert_allclose(g2, 5 * 0.64, rtol=1e-12)
    # Ito density G^2 / (2 h) integrates to (1/2) ||sigma||^2 int h
    rate = ito_rate_density(model, X, h, np.zeros_like(X)).mean()
    assert rate == pytest.approx(model.nominal_injection_rate(0.8), rel=1e-12)


def test_sigma_zero_gives_zero_coefficients():
    model = sw_topography_modes(2.0, [0.0, 0.0], 2)
    assert np.all(model.coefficients(X, np.ones_like(X), np.zeros_like(X)) == 0.0)


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        sw_topography_modes(2.0, [1.0], 0)
    with pytest.raises(ValueError):
        sw_height_modes(2.0, [math.nan], 1)
    with pytest.raises(ValueError):
        localize(sw_height_modes(2.0, [1.0], 1), -1.0)
    with pytest.raises(ValueError):
        localize(sw_height_modes(2.0, [1.0], 1), 1.0, margin=1.5)


@pytest.mark.parametrize(
    "model",
    [
        sw_topography_modes(2.0, [1.0] * 5, 5),
        sw_height_modes(2.0, [1.0] * 5, 5),
        localize(sw_height_modes(2.0, [1.0] * 5, 5), 4.0),
    ],
    ids=["topography", "height", "localized"],
)
def test_vacuum_and_growth_bound(model):
    rng = np.random.default_rng(7)
    rho = rng.uniform(0, 5, (100, X.size))
    rho[:, ::7] = 0.0
    u = rng.uniform(-5, 5, rho.shape)
    q = rho * u
    g2 = g_squared(model, X, rho, q)
    assert np.all(g2[:, ::7] == 0.0)
    assert np.all(g2 <= growth_bound(model, SW, rho, q))


def test_generic_model():
    law = GasLaw.normalized(1.4)
    model = generic_multiplicative(law, lambda x: np.stack([np.ones_like(x), np.cos(2 * np.pi * x)]), 2, math.sqrt(2))
    assert model.kind == GENERIC
    rho = np.full_like(X, 2.0)
    np.testing.assert_allclose(model.coefficient_fn(1, X, rho, 0.3), 2.0 * np.cos(2 * np.pi * X))
    assert np.all(g_squared(model, X, rho, rho) <= growth_bound(model, law, rho, rho))


def test_zero_model():
    model = zero_noise()
    assert model.n_modes == 0
    assert np.all(g_squared(model, X, np.ones_like(X), np.ones_like(X)) == 0.0)
    inc = sample_increments(1, 2, 3, 0, 0.1)
    assert inc.dW.shape == (0,)


def test_smoothstep_shape():
    s = np.linspace(0, 1.2, 121)
    psi = smoothstep_cutoff(s, 0.5)
    assert np.all(psi[s <= 0.5] == 1.0)
    assert np.all(psi[s >= 1.0] == 0.0)
    mid = smoothstep_cutoff(0.75, 0.5)
    assert 0.0 < mid < 1.0 and mid == pytest.approx(0.5)
    assert np.all(np.diff(psi) <= 0)


def test_localized_model_plateau_and_support():
    base = sw_height_modes(2.0, [1.0] * 3, 3)
    kappa = 4.0
    model = localize(base, kappa, 0.5)
    rho = np.array([0.5, 1.0, 4.0, 1.0])
    u = np.array([0.0, 0.5, 0.0, 3.0])
    pair = riemann_invariants(SW, rho, rho * u)
    s = np.maximum(abs(pair.z), abs(pair.w)) / kappa
    loc = model.coefficients(0.3, rho, rho * u)
    ref = base.coefficients(0.3, rho, rho * u)
    for i, si in enumerate(s):
        if si <= 0.5:
            np.testing.assert_array_equal(loc[:, i], ref[:, i])
        elif si >= 1.0:
            assert np.all(loc[:, i] == 0.0)


@settings(max_examples=100, deadline=None)
@given(rho=st.floats(0.0, 10.0), u=st.floats(-20, 20))
def test_localized_model_vanishes_outside_region(rho, u):
    model = localize(sw_height_modes(2.0, [1.0] * 2, 2), 4.0, 0.25)
    pair = riemann_invariants(SW, rho, rho * u)
    coeff = model.coefficients(np.array([0.1, 0.6]), rho, rho * u)
    if max(abs(pair.z), abs(pair.w)) >= 4.0:
        assert np.all(coeff == 0.0)


def test_increments_are_reproducible():
    a = sample_increments(42, 3, 17, 10, 0.01)
    b = sample_increments(42, 3, 17, 10, 0.01)
    np.testing.assert_array_equal(a.dW, b.dW)
    assert (a.realization_id, a.step_index, a.dt) == (3, 17, 0.01)
    c = sample_increments(42, 4, 17, 10, 0.01)
    d = sample_increments(43, 3, 17, 10, 0.01)
    assert not np.array_equal(a.dW, c.dW)
    assert not np.array_equal(a.dW, d.dW)


def test_increments_are_order_independent():
    steps = [5, BLOCK_STEPS + 1, 3, 2 * BLOCK_STEPS, 5]
    src = IncrementSource(9, [0, 1, 2], 4)
    for s in steps:
        got = src.draw(s, 0.5)
        for r in range(3):
            np.testing.assert_array_equal(got[r], sample_increments(9, r, s, 4, 0.5).dW)


def test_increment_variance_chi_square():
    dt = 0.01
    draws = np.concatenate([sample_increments(3, r, s, 10, dt).dW for r in range(20) for s in range(500)])
    n = draws.size
    var = np.mean(draws**2)
    # the sample second moment has standard error dt sqrt(2/n)
    assert abs(var - dt) <= 3 * dt * math.sqrt(2 / n)
    assert abs(draws.mean()) <= 3 * math.sqrt(dt / n)


def test_increment_streams_uncorrelated():
    a = np.concatenate([sample_increments(3, 0, s, 8, 1.0).dW for s in range(2000)])
    b = np.concatenate([sample_increments(3, 1, s, 8, 1.0).dW for s in range(2000)])
    assert abs(np.corrcoef(a, b)[0, 1]) < 3 / math.sqrt(a.size)


def test_dt_must_be_positive():
    with pytest.raises(ValueError):
        sample_increments(1, 1, 1, 2, 0.0)
