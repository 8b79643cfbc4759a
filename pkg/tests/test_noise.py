import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings
from hypothesis import strategies as st

from app.errors import ParameterError
from app.services.noise import (
    NoiseMode,
    RngStream,
    derive_key,
    derive_stream,
    laplace,
    uniform_threshold,
    uniform_thresholds,
)


def test_derive_key_depends_on_seed_and_path():
    base = derive_key(1, [("site", 1)])
    assert base == derive_key(1, [("site", 1)])
    assert base != derive_key(2, [("site", 1)])
    assert base != derive_key(1, [("site", 2)])
    assert base != derive_key(1, [("server", 1)])
    assert 0 <= base < 2 ** 128


def test_child_stream_ignores_parent_consumption():
    parent = derive_stream(5, (("trial", 0),))
    parent.generator.random(100)
    used = parent.child("site", 3).generator.random()
    fresh = derive_stream(5, (("trial", 0),)).child("site", 3).generator.random()
    assert used == fresh


def test_sibling_streams_differ():
    root = derive_stream(5)
    a = root.child("site", 1).generator.random(8)
    b = root.child("site", 2).generator.random(8)
    assert not np.array_equal(a, b)


def test_child_keeps_noise_mode():
    root = derive_stream(5, noise_mode=NoiseMode.DISABLED)
    assert root.child("server").noise_mode is NoiseMode.DISABLED


def test_laplace_disabled_is_zero(quiet_stream):
    assert all(laplace(quiet_stream, 3.0) == 0.0 for _ in range(50))


@pytest.mark.parametrize("scale", [0.0, -1.0])
def test_laplace_rejects_bad_scale(noisy_stream, scale):
    with pytest.raises(ParameterError):
        laplace(noisy_stream, scale)


def test_laplace_moments(noisy_stream):
    draws = np.array([laplace(noisy_stream, 2.0) for _ in range(20000)])
    # mean 0, E|X| = scale, both with standard error around 0.015
    assert abs(draws.mean()) < 0.1
    assert abs(np.abs(draws).mean() - 2.0) < 0.1
    assert (draws > 0).any() and (draws < 0).any()


def test_laplace_reproducible():
    a = laplace(derive_stream(3), 1.0)
    b = laplace(derive_stream(3), 1.0)
    assert a == b


def test_uniform_threshold_covers_support(noisy_stream):
    seen = {uniform_threshold(noisy_stream, 5) for _ in range(500)}
    assert seen == {1, 2, 3, 4, 5}


def test_uniform_threshold_degenerate(noisy_stream):
    assert uniform_threshold(noisy_stream, 1) == 1


def test_uniform_threshold_rejects_empty_support(noisy_stream):
    with pytest.raises(ParameterError):
        uniform_threshold(noisy_stream, 0)
    with pytest.raises(ParameterError):
        uniform_thresholds(noisy_stream, 0, 3)


def test_uniform_thresholds_batch(noisy_stream):
    draws = uniform_thresholds(noisy_stream, 7, 1000)
    assert draws.shape == (1000,)
    assert draws.dtype == np.int64
    assert draws.min() >= 1 and draws.max() <= 7


@hsettings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 64 - 1), delta=st.integers(min_value=1, max_value=50))
def test_thresholds_always_in_range(seed, delta):
    rng = RngStream(seed, (("site", 1),))
    r = uniform_threshold(rng, delta)
    assert 1 <= r <= delta


@hsettings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32), scale=st.floats(min_value=1e-3, max_value=1e3))
def test_laplace_is_finite(seed, scale):
    assert math.isfinite(laplace(RngStream(seed), scale))


def laplace_cdf(x: np.ndarray, scale: float) -> np.ndarray:
    return np.where(x < 0, 0.5 * np.exp(x / scale), 1.0 - 0.5 * np.exp(-x / scale))


@pytest.fixture(scope="module")
def unit_draws() -> np.ndarray:
    rng = derive_stream(17, (("laplace", 0),))
    return np.array([laplace(rng, 1.0) for _ in range(100_000)])


def test_laplace_variance_and_tail(unit_draws):
    # standard errors: mean 0.0045, variance 0.014, tail 0.0007
    assert abs(unit_draws.mean()) < 0.02
    assert 1.9 <= unit_draws.var() <= 2.1
    assert abs((np.abs(unit_draws) > 3).mean() - math.exp(-3)) < 0.005


def test_laplace_matches_cdf(unit_draws):
    ordered = np.sort(unit_draws)
    n = len(ordered)
    cdf = laplace_cdf(ordered, 1.0)
    above = np.arange(1, n + 1) / n - cdf
    below = cdf - np.arange(0, n) / n
    statistic = max(above.max(), below.max())
    # Kolmogorov-Smirnov critical value at 0.001
    assert statistic < 1.95 / math.sqrt(n)


def test_uniform_thresholds_are_uniform():
    draws = uniform_thresholds(derive_stream(19), 4, 100_000)
    frequencies = np.bincount(draws, minlength=5)[1:] / len(draws)
    assert np.all(np.abs(frequencies - 0.25) < 0.01)
    assert draws.min() == 1 and draws.max() == 4
