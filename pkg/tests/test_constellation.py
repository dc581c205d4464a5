import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gammashape.constellation import (
    Constellation,
    from_polar,
    generate_apsk,
    min_distance,
    normalize_power,
    pairwise_distance_sum,
    polar,
    psk,
    qam,
)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_polar_round_trip(re, im):
    z = complex(re, im)
    rho, phi = polar(z)
    assert 0.0 <= phi < 2 * np.pi
    back = complex(from_polar(rho, phi))
    assert abs(back - z) <= 1e-12 * max(abs(z), 1e-300)


def test_single_ring_grid():
    c = generate_apsk(1, 4, 1.0)
    np.testing.assert_allclose(np.abs(c.points), 1.0)
    np.testing.assert_allclose(polar(c.points)[1], [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-15)


def test_two_ring_offset():
    c = generate_apsk(2, 2, 2.0)
    np.testing.assert_allclose(c.ring_radii, [1.0, 2.0])
    phi = polar(c.points)[1]
    np.testing.assert_allclose(phi[2:] - phi[:2], np.pi / 2, atol=1e-15)


def test_default_size_grid_distinct():
    c = generate_apsk(16, 32, 4.0)
    assert len(c) == 512
    # brute-force scan
    d = np.abs(c.points[:, None] - c.points[None, :])
    np.fill_diagonal(d, np.inf)
    assert d.min() > 0
    assert min_distance(c.points) == d.min()


@pytest.mark.parametrize("args", [(0, 4, 1.0), (2, 0, 1.0), (2, 4, 0.0), (2, 4, -1.0)])
def test_apsk_errors(args):
    with pytest.raises(ValueError):
        generate_apsk(*args)


def test_ring_amplitudes_equal():
    c = generate_apsk(5, 7, 3.0)
    for k, r in enumerate(c.ring_radii):
        np.testing.assert_allclose(np.abs(c.points[c.ring_index == k]), r, rtol=1e-12)


def test_qam_power():
    q = qam(16, 1.0)
    assert q.avg_power == pytest.approx(1.0, abs=1e-9)
    assert np.mean(np.abs(q.points) ** 2) == pytest.approx(1.0, abs=1e-9)


@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=20),
       st.floats(0.01, 100))
def test_normalize_power_property(pts, P):
    z = np.array([complex(a, b) for a, b in pts])
    if np.sum(np.abs(z) ** 2) < 1e-6 or len(set(pts)) < len(pts):
        return
    c = normalize_power(z, P)
    assert np.mean(np.abs(c.points) ** 2) == pytest.approx(P, rel=1e-12)


def test_normalize_errors():
    with pytest.raises(ValueError):
        normalize_power([0j, 0j], 1.0)
    with pytest.raises(ValueError):
        normalize_power([1, 2], 0.0)


def test_pairwise_sum_direct():
    z = np.array([1, 1j, -1, -1j])
    brute = sum(abs(a - b) ** 2 for a in z for b in z)
    assert pairwise_distance_sum(z) == pytest.approx(brute, rel=1e-15)


def test_constellation_validation():
    with pytest.raises(ValueError):
        Constellation(np.array([1, 1]), 1.0)
    with pytest.raises(ValueError):
        Constellation(np.array([1, -1]), 2.0)


def test_json_csv_round_trip(tmp_path):
    c = psk(8, 1.0).rotated(0.123)
    c.to_json(tmp_path / "c.json")
    back = Constellation.from_json(tmp_path / "c.json")
    np.testing.assert_array_equal(back.points, c.points)
    data = json.loads((tmp_path / "c.json").read_text())
    assert set(data) == {"points", "avg_power"}
    c.to_csv(tmp_path / "c.csv")
    np.testing.assert_array_equal(Constellation.from_csv(tmp_path / "c.csv").points, c.points)
