import math

import numpy as np
import pytest

from gammashape.constellation import Constellation, psk, qam
from gammashape.design import default_candidates, select_constellation
from gammashape.gamma import GammaMixture, GammaParams
from gammashape.metrics import albersheim_pd, exact_pd_rice
from gammashape.rng import stream
from gammashape.sim import (
    SWEEP_COLUMNS,
    SimConfig,
    awgn_channel,
    ml_detect,
    radar_channel,
    simulate_detection,
    simulate_pd,
    simulate_point,
    simulate_ser,
    sweep_ebn0,
)
from gammashape.special import q_function


def test_awgn_noise_statistics():
    rng = stream(1)
    x = np.zeros(10 ** 6, dtype=complex)
    n = awgn_channel(x, 0.3, rng)
    assert np.mean(np.abs(n) ** 2) == pytest.approx(0.3, rel=0.01)
    assert abs(np.corrcoef(n.real, n.imag)[0, 1]) < 0.01
    assert awgn_channel(1 + 1j, 0.0, rng) == 1 + 1j


def test_radar_channel():
    rng = stream(2)
    y = radar_channel(np.ones(10 ** 6), 0.0, 0.5, rng)
    assert np.mean(np.abs(y) ** 2) == pytest.approx(0.5, rel=0.01)
    assert radar_channel(0.3j, 1.0, 0.0, rng) == 0.3j


def test_ml_detect_contract():
    c = psk(8)
    assert ml_detect(c.points[5], c) == 5
    # equidistant between points 3 and 4 of a line
    line = Constellation.from_points([-3, -1, 1, 3, 5, 7, 9, 11])
    mid = 0.5 * (line.points[3] + line.points[4])
    assert ml_detect(mid, line) == 3


def test_ml_detect_brute_force():
    c = qam(16)
    rng = stream(3)
    y = rng.normal(size=10 ** 4) + 1j * rng.normal(size=10 ** 4)
    brute = np.array([min(range(16), key=lambda k: abs(v - c.points[k])) for v in y])
    np.testing.assert_array_equal(ml_detect(y, c), brute)


def test_ser_noiseless():
    assert simulate_ser(qam(16), 1e-12, 10 ** 4, 0) == (0.0, 0.0)


@pytest.mark.parametrize("ebn0_db", [0.0, 4.0, 7.0])
def test_bpsk_closed_form(ebn0_db):
    c = Constellation.from_points([1.0, -1.0])
    eb = 10 ** (ebn0_db / 10)
    ser, se = simulate_ser(c, 1.0 / eb, 10 ** 6, 5)
    # E_b = 1 and N0 = sigma^2 for BPSK
    assert abs(ser - q_function(math.sqrt(2 * eb))) < 3 * se


def test_ser_deterministic_and_rotation():
    c = select_constellation(default_candidates(), GammaParams(3.36, 1.0), 16)
    a = simulate_ser(c, 1 / 40, 2 * 10 ** 5, 8)
    assert a == simulate_ser(c, 1 / 40, 2 * 10 ** 5, 8)
    b = simulate_ser(c.rotated(1.1), 1 / 40, 2 * 10 ** 5, 9)
    assert abs(a[0] - b[0]) < 3 * math.hypot(a[1], b[1])


def test_pd_limits():
    c = psk(16)
    assert simulate_pd(c, 1e-9, 1e-3, 10 ** 4, 0)[0] == 1.0
    det = simulate_detection(psk(2, 1e-30), 1.0, 1e-2, 10 ** 6, 1)
    assert abs(det["pd"] - 1e-2) < 3 * det["pd_stderr"]


def test_false_alarm_rate():
    det = simulate_detection(psk(16), 0.2, 1e-3, 10 ** 7, 4)
    assert 0.7e-3 <= det["pfa"] <= 1.3e-3
    assert abs(det["pfa"] - 1e-3) < 3 * det["pfa_stderr"]


@pytest.mark.parametrize("snr_db", [8.0, 10.0, 12.0])
def test_constant_modulus_pd_matches_rice(snr_db):
    s2 = 10 ** (-snr_db / 10)
    pd, se = simulate_pd(psk(16), s2, 1e-3, 10 ** 6, 6)
    assert abs(pd - exact_pd_rice(1.0, s2, 1e-3)) < 3 * se


def test_simulate_point_result():
    c = psk(16)
    r = simulate_point(c, SimConfig(n_symbols=10 ** 4, n_pd_trials=10 ** 4, seed=3))
    assert 0 <= r.ser <= 1
    assert r.ser_stderr == pytest.approx(math.sqrt(r.ser * (1 - r.ser) / 10 ** 4))
    assert r == simulate_point(c, SimConfig(n_symbols=10 ** 4, n_pd_trials=10 ** 4, seed=3))


def test_sweep_rows_and_monotone_ser():
    c = select_constellation(default_candidates(), GammaParams(3.36, 1.0), 16)
    mix = GammaMixture([1.0], [1.2], [1.6])
    grid = [x * 0.5 for x in range(31)]
    rows = sweep_ebn0(c, grid, SimConfig(n_symbols=2 * 10 ** 4, n_pd_trials=10 ** 3, n_crb=10 ** 4),
                      GammaParams(3.36, 1.0), mix)
    assert len(rows) == 31
    assert tuple(rows[0]) == SWEEP_COLUMNS
    for r0, r1 in zip(rows, rows[1:]):
        assert r1["ser"] <= r0["ser"] + 3 * math.hypot(r0["ser_stderr"], r1["ser_stderr"])
    threaded = sweep_ebn0(c, grid, SimConfig(n_symbols=2 * 10 ** 4, n_pd_trials=10 ** 3, n_crb=10 ** 4),
                          GammaParams(3.36, 1.0), mix, threads=4)
    assert threaded == rows


def test_sweep_empty_grid():
    with pytest.raises(ValueError):
        sweep_ebn0(psk(4), [], SimConfig())
