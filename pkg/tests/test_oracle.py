import numpy as np
import pytest

from swipt.channel import ArrayGeometry, FrequencyGrid, PathTap, frequency_response
from swipt.harvester import RectennaParams, zdc
from swipt.oracle import OracleConfigError, monte_carlo_zdc
from swipt.waveform import WaveformDesign, matched_phases

RECT = RectennaParams()
TAPS = [PathTap(0.0, 1.0, 0.3, 0.4), PathTap(2e-7, 0.5, -1.2, 1.1)]


def setup(n, m):
    grid = FrequencyGrid.centered(5.18e9, 1e6, n)
    geom = ArrayGeometry(m, 0.029)
    return grid, geom, frequency_response(TAPS, grid, geom)


def test_deterministic_multisine_is_exact(rng):
    grid, geom, h = setup(3, 2)
    phi_p, phi_i = matched_phases(h)
    d = WaveformDesign(rng.random((3, 2)), np.zeros((3, 2)), phi_p, phi_i, 0.8)
    rep = monte_carlo_zdc(d, TAPS, geom, grid, RECT, 5, seed=1)
    assert rep.estimate == pytest.approx(zdc(d, h, RECT), rel=1e-6)
    assert rep.stderr < 1e-12 * rep.estimate


def test_single_tone_ofdm_converges():
    grid, geom, h = setup(1, 1)
    d = WaveformDesign([[0.0]], [[0.8]], rho=1.0)
    rep = monte_carlo_zdc(d, TAPS, geom, grid, RECT, 10_000, seed=3)
    assert abs(rep.estimate - zdc(d, h, RECT)) <= 3 * rep.stderr


def test_superposed_design_and_cross_terms(rng):
    grid, geom, h = setup(2, 2)
    d = WaveformDesign(rng.random((2, 2)), rng.random((2, 2)), rng.normal(size=(2, 2)),
                       rng.normal(size=(2, 2)), 0.6)
    rep = monte_carlo_zdc(d, TAPS, geom, grid, RECT, 20_000, seed=11)
    assert abs(rep.estimate - zdc(d, h, RECT)) <= 3 * rep.stderr
    assert set(rep.cross_terms) == {"yp_yi", "yp3_yi", "yp_yi3"}
    for est in rep.cross_terms.values():
        assert est.within(0.0)


def test_same_seed_same_answer_regardless_of_batching(rng):
    grid, geom, _ = setup(2, 1)
    d = WaveformDesign(rng.random((2, 1)), rng.random((2, 1)), rho=0.5)
    a = monte_carlo_zdc(d, TAPS, geom, grid, RECT, 2500, seed=7)
    b = monte_carlo_zdc(d, TAPS, geom, grid, RECT, 2500, seed=7)
    c = monte_carlo_zdc(d, TAPS, geom, grid, RECT, 2500, seed=8)
    assert a.to_dict() == b.to_dict()
    assert a.estimate != c.estimate


def test_more_periods_do_not_change_deterministic_average(rng):
    grid, geom, _ = setup(2, 1)
    d = WaveformDesign(rng.random((2, 1)), np.zeros((2, 1)), rho=0.5)
    one = monte_carlo_zdc(d, TAPS, geom, grid, RECT, 1, seed=0)
    three = monte_carlo_zdc(d, TAPS, geom, grid, RECT, 1, seed=0, periods=3)
    assert three.estimate == pytest.approx(one.estimate, rel=1e-12)


@pytest.mark.parametrize("kwargs", [
    {"surrogate_k": 3},             # below 4N
    {"samples_per_period": 16},     # aliases 4th-order products
    {"periods": 1.5},               # not a whole number of periods
])
def test_bad_sampling_rejected(kwargs):
    grid, geom, _ = setup(2, 1)
    d = WaveformDesign(np.ones((2, 1)), np.ones((2, 1)))
    with pytest.raises(OracleConfigError):
        monte_carlo_zdc(d, TAPS, geom, grid, RECT, 10, 0, **kwargs)


def test_shape_mismatch_rejected():
    grid, geom, _ = setup(2, 1)
    with pytest.raises(ValueError):
        monte_carlo_zdc(WaveformDesign(np.ones((3, 1)), np.ones((3, 1))), TAPS, geom, grid, RECT, 10, 0)
    with pytest.raises(ValueError):
        monte_carlo_zdc(WaveformDesign(np.ones((2, 1)), np.ones((2, 1))), TAPS, geom, grid, RECT, 0, 0)
