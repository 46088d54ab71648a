import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pckit.errors import AlreadyUnwrapped, EmptyRegion, InvalidRunWarning
from pckit.grid import SphericalGrid
from pckit.phase import PhasePattern, mean_and_variance, unwrap_cut, unwrap_theta, wrap

# Multiples of 2**-20 degrees keep x + 360 n exact in float64, so the
# wrap/unwrap identities can be checked bit for bit.
QUANTUM = 2.0 ** -20
wrapped_phase = st.integers(int(-180 / QUANTUM) + 1, int(180 / QUANTUM)).map(lambda i: i * QUANTUM)
cuts = st.lists(wrapped_phase, min_size=1, max_size=91)


@pytest.mark.parametrize("cut, expected", [
    ([170, -170, -150], [170, 190, 210]),
    ([10, 20, 30], [10, 20, 30]),
    ([0, 179, -2], [0, 179, 358]),
    ([-170, 170, 150], [-170, -190, -210]),
])
def test_unwrap_cut_examples(cut, expected):
    out, restarts = unwrap_cut(cut)
    assert out.tolist() == expected
    assert restarts == 0


@pytest.mark.parametrize("value, expected", [
    (190, -170), (-180, 180), (720, 0), (180, 180), (-179.5, -179.5), (540, 180), (-540, 180),
])
def test_wrap_examples(value, expected):
    assert wrap(value) == expected


@settings(max_examples=300)
@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_wrap_range_and_turns(value):
    w = wrap(value)
    assert -180.0 < w <= 180.0
    turns = (value - w) / 360.0
    assert abs(turns - round(turns)) < 1e-9


@given(st.floats(-180.0, 180.0, exclude_min=True))
def test_wrap_identity_inside_interval(value):
    assert wrap(value) == value


@settings(max_examples=200)
@given(cuts)
def test_unwrap_adds_whole_turns(cut):
    out, _ = unwrap_cut(cut)
    assert np.array_equal(wrap(out), np.asarray(cut, dtype=float))
    assert out[0] == cut[0]
    if len(cut) > 1:
        assert np.all(np.abs(np.diff(out)) < 180.0)


@settings(max_examples=200)
@given(st.lists(st.floats(-180.0, 180.0, exclude_min=True), min_size=2, max_size=91))
def test_unwrap_general_floats_within_rounding(cut):
    out, _ = unwrap_cut(cut)
    assert np.allclose(wrap(out), cut, rtol=0, atol=1e-10)
    assert np.all(np.abs(np.diff(out)) <= 180.0)


@settings(max_examples=200)
@given(cuts)
def test_unwrap_idempotent(cut):
    once, _ = unwrap_cut(cut)
    twice, _ = unwrap_cut(once)
    assert np.array_equal(once, twice)


@settings(max_examples=200)
@given(cuts, st.integers(-5, 5))
def test_unwrap_turn_equivariance(cut, turns):
    base, _ = unwrap_cut(cut)
    shifted, _ = unwrap_cut(np.asarray(cut) + 360.0 * turns)
    assert np.array_equal(shifted, base + 360.0 * turns)


def test_unwrap_restarts_after_invalid():
    with pytest.warns(InvalidRunWarning):
        pattern = PhasePattern(SphericalGrid(45.0),
                               np.array([[170, 0, 0, 0, 0, 0, 0, 0],
                                         [np.nan, 0, 0, 0, 0, 0, 0, 0],
                                         [-170, 0, 0, 0, 0, 0, 0, 0]], dtype=float))
        out = unwrap_theta(pattern)
    # the run after the gap starts fresh, so -170 stays put
    assert out.values[2, 0] == -170
    assert out.invalid_mask[1, 0]


def test_unwrap_out_of_range_and_flag():
    grid = SphericalGrid(45.0)
    values = np.tile(np.array([[170.0], [-170.0], [-150.0]]), (1, grid.n_phi))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        out = unwrap_theta(PhasePattern(grid, values))
    assert out.unwrapped
    assert np.all(out.values[:, 3] == [170, 190, 210])
    with pytest.raises(AlreadyUnwrapped):
        unwrap_theta(out)


def test_unwrap_cuts_are_independent():
    grid = SphericalGrid(90.0)
    values = np.array([[0.0, 0, 0, 0], [179, 10, 0, 0]])
    out = unwrap_theta(PhasePattern(grid, values))
    assert out.values[:, 0].tolist() == [0, 179]
    assert out.values[:, 1].tolist() == [0, 10]


def test_mean_and_variance_examples():
    assert mean_and_variance([10, 10, 10]) == (10.0, 0.0)
    assert mean_and_variance([0, 10]) == (5.0, 50.0)
    with pytest.raises(EmptyRegion):
        mean_and_variance([])


@settings(max_examples=100)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50), st.floats(-1e3, 1e3))
def test_mean_and_variance_translation(values, c):
    mu, var = mean_and_variance(values)
    mu2, var2 = mean_and_variance(np.asarray(values) + c)
    assert mu2 == pytest.approx(mu + c, abs=1e-9)
    assert var2 == pytest.approx(var, rel=1e-6, abs=1e-6)
