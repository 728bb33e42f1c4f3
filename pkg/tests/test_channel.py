import numpy as np
import pytest
from hypothesis import given, strategies as st

from swipt.channel import (ArrayGeometry, FrequencyGrid, FrequencyResponse, InvalidScenarioError, PathTap,
                           array_phase, flat_channel, frequency_response)

GRID = FrequencyGrid.centered(5.18e9, 1e6, 16)


def test_single_unit_tap_is_identity():
    h = frequency_response([PathTap()], GRID, ArrayGeometry(1))
    np.testing.assert_allclose(h.gains, np.ones((16, 1)), atol=1e-12)


@pytest.mark.parametrize("n", [0, 5, 15])
def test_half_period_delay_cancels_tone(n):
    f_n = GRID.frequencies[n]
    taps = [PathTap(), PathTap(delay=1 / (2 * f_n))]
    h = frequency_response(taps, GRID, ArrayGeometry(1))
    assert abs(h.gains[n, 0]) < 1e-9
    # neighbouring tones are not cancelled exactly
    other = (n + 1) % 16
    assert abs(h.gains[other, 0]) > 1e-6


def test_broadside_path_gives_equal_columns():
    geom = ArrayGeometry(2, 0.029)
    h = frequency_response([PathTap(amplitude=0.7, phase=1.1, departure_angle=np.pi / 2)], GRID, geom)
    np.testing.assert_allclose(h.gains[:, 1], h.gains[:, 0], atol=1e-12)


def test_first_antenna_is_phase_reference():
    delta = array_phase(GRID, ArrayGeometry(3, 0.02), [0.0, 0.4, 1.3])
    assert delta.shape == (16, 3, 3)
    np.testing.assert_array_equal(delta[:, 0, :], 0.0)


def test_endfire_offset_matches_wavelength():
    geom = ArrayGeometry(2, 0.03)
    delta = array_phase(GRID, geom, [0.0])
    np.testing.assert_allclose(delta[:, 1, 0], 2 * np.pi * 0.03 * GRID.frequencies / 299_792_458.0)


@pytest.mark.parametrize("n,m", [(16, 1), (1, 1), (2, 2)])
def test_flat_channel_is_all_ones(n, m):
    h = flat_channel(FrequencyGrid(1e9, 1e6, n), ArrayGeometry(m, 0.01))
    assert h.shape == (n, m)
    np.testing.assert_array_equal(h.gains, np.ones((n, m)))


def test_empty_tap_list_rejected():
    with pytest.raises(InvalidScenarioError):
        frequency_response([], GRID, ArrayGeometry(1))


@pytest.mark.parametrize("kwargs", [{"amplitude": -1.0}, {"delay": -1e-9}])
def test_bad_taps_rejected(kwargs):
    with pytest.raises(InvalidScenarioError):
        PathTap(**kwargs)


@pytest.mark.parametrize("args", [(1e9, 0.0, 4), (1e9, 1e6, 0), (-1.0, 1e6, 4)])
def test_bad_grid_rejected(args):
    with pytest.raises(InvalidScenarioError):
        FrequencyGrid(*args)


def test_array_needs_spacing():
    with pytest.raises(InvalidScenarioError):
        ArrayGeometry(2, 0.0)
    ArrayGeometry(1)  # spacing irrelevant for one element


def test_centered_grid_is_symmetric_about_center():
    assert GRID.frequencies.mean() == pytest.approx(5.18e9, rel=1e-15)
    assert np.diff(GRID.frequencies) == pytest.approx(np.full(15, 1e6))


def test_polar_round_trip(rng):
    g = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    h = FrequencyResponse(g)
    back = FrequencyResponse.from_polar(h.amplitudes, h.phases)
    np.testing.assert_allclose(back.gains, g, rtol=1e-13)
    np.testing.assert_allclose(h.row_norms(), np.linalg.norm(g, axis=1))


@given(st.floats(0.0, 5.0), st.floats(0.0, 1e-6), st.floats(-np.pi, np.pi), st.floats(0.0, np.pi))
def test_amplitude_scales_linearly(alpha, tau, xi, theta):
    geom = ArrayGeometry(2, 0.029)
    base = frequency_response([PathTap(tau, 1.0, xi, theta)], GRID, geom).gains
    scaled = frequency_response([PathTap(tau, alpha, xi, theta)], GRID, geom).gains
    np.testing.assert_allclose(scaled, alpha * base, atol=1e-12)


@given(st.floats(0.0, np.pi), st.floats(0.0, np.pi))
def test_single_antenna_ignores_departure_angle(a, b):
    taps = lambda th: [PathTap(1e-8, 0.5, 0.3, th), PathTap(0.0, 1.0, 0.0, th)]
    h1 = frequency_response(taps(a), GRID, ArrayGeometry(1)).gains
    h2 = frequency_response(taps(b), GRID, ArrayGeometry(1)).gains
    np.testing.assert_allclose(h1, h2, atol=1e-12)


@given(st.lists(st.tuples(st.floats(0, 1e-6), st.floats(0, 2), st.floats(-3, 3)), min_size=1, max_size=4))
def test_response_is_sum_of_single_paths(specs):
    taps = [PathTap(d, a, p, 0.7) for d, a, p in specs]
    geom = ArrayGeometry(2, 0.02)
    total = frequency_response(taps, GRID, geom).gains
    parts = sum(frequency_response([t], GRID, geom).gains for t in taps)
    np.testing.assert_allclose(total, parts, atol=1e-10)
