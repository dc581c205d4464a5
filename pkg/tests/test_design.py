import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gammashape.constellation import generate_apsk
from gammashape.design import (
    DesignConfig,
    default_candidates,
    log_point_likelihood,
    objective,
    point_likelihood,
    pso_optimize,
    select_constellation,
)
from gammashape.gamma import GammaParams
from gammashape.metrics import average_pd, mutual_information_mc, normalized_mi
from gammashape.rng import stream

GRID_512 = generate_apsk(16, 32, 4.0)


def test_point_likelihood_plug_in():
    assert point_likelihood(1.0, GammaParams(2.0, 1.0)) == pytest.approx(math.exp(-1) / (2 * math.pi), rel=1e-14)


@given(st.floats(0.01, 10.0), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_point_likelihood_phase_free(r, p1, p2):
    prm = GammaParams(2.5, 0.8)
    assert point_likelihood(r * np.exp(1j * p1), prm) == pytest.approx(point_likelihood(r * np.exp(1j * p2), prm),
                                                                       rel=1e-12)


@pytest.mark.parametrize("a,b", [(2.0, 1.0), (3.36, 0.5), (4.71, 0.3)])
def test_mode_maximizes_over_rings(a, b):
    mode = (a - 1) * b
    radii = np.linspace(0.01, 6.0, 2000)
    radii = np.sort(np.r_[radii, mode])
    ll = [point_likelihood(r, GammaParams(a, b)) for r in radii]
    assert radii[int(np.argmax(ll))] == pytest.approx(mode)
    # the planar density peaks one scale unit lower
    lp = log_point_likelihood(np.sort(np.r_[radii, mode - b]), GammaParams(a, b), "planar")
    assert np.sort(np.r_[radii, mode - b])[int(np.argmax(lp))] == pytest.approx(mode - b)


def test_spike_gives_psk():
    ring = GRID_512.ring_radii[7]
    c = select_constellation(GRID_512, GammaParams(50.0, 0.02 * ring), 16, 0.0, 1.0, "amplitude")
    amps = np.abs(c.points)
    assert np.ptp(amps) < 1e-12


def test_flat_law_spreads_over_rings():
    c = select_constellation(GRID_512, GammaParams(1.01, 10.0), 16, 0.05, 1.0, "amplitude")
    assert len(np.unique(np.round(np.abs(c.points), 9))) >= 3


def test_flat_law_without_penalty_stays_on_one_ring():
    # every ring holds 32 equally likely points, so lambda = 0 fills one ring
    c = select_constellation(GRID_512, GammaParams(1.01, 10.0), 16, 0.0, 1.0, "amplitude")
    assert len(np.unique(np.round(np.abs(c.points), 9))) == 1


@pytest.mark.parametrize("lik", ["planar", "amplitude"])
@pytest.mark.parametrize("ab", [(4.71, 1.0), (3.36, 1.0), (2.12, 18.13)])
def test_selection_power_and_determinism(lik, ab):
    cand = default_candidates()
    c1 = select_constellation(cand, GammaParams(*ab), 16, 0.05, 1.0, lik)
    c2 = select_constellation(cand, GammaParams(*ab), 16, 0.05, 1.0, lik)
    assert np.mean(np.abs(c1.points) ** 2) == pytest.approx(1.0, abs=1e-9)
    assert c1.to_dict() == c2.to_dict()


def test_selection_too_many_points():
    with pytest.raises(ValueError):
        select_constellation(generate_apsk(1, 4, 1.0), GammaParams(2, 1), 5)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 2 * np.pi), st.sampled_from([(4.71, 1.0), (3.36, 1.0), (2.12, 18.13), (2.5, 3.0)]))
def test_selection_rotation_covariant(theta, ab):
    for cand in (default_candidates(), GRID_512):
        base = select_constellation(cand, GammaParams(*ab), 16)
        rot = select_constellation(cand.rotated(theta), GammaParams(*ab), 16)
        np.testing.assert_allclose(rot.points, base.points * np.exp(1j * theta), atol=1e-12)


def test_objective_endpoints():
    cand = default_candidates()
    f1, c1, r1 = objective(3.0, 2.0, cand, DesignConfig(omega_d=1.0), 7)
    assert f1 == average_pd(c1, 1 / 40, 1e-3)[0]
    f0, c0, r0 = objective(3.0, 2.0, cand, DesignConfig(omega_d=0.0), 7)
    assert f0 == normalized_mi(mutual_information_mc(c0, 1 / 40, 1000, 7), 16)


def test_objective_bounds_check():
    with pytest.raises(ValueError):
        objective(1.0, 2.0, default_candidates(), DesignConfig(), 0)


def test_tradeoff_design_near_grid_optimum():
    cand = default_candidates()
    cfg = DesignConfig(omega_d=0.6)
    A, B = np.linspace(2, 5, 50), np.linspace(1, 20, 50)
    best = max(objective(a, b, cand, cfg, cfg.seed)[0] for a in A for b in B)
    f = objective(3.36, 1.0, cand, cfg, cfg.seed)[0]
    assert f >= best - 0.05


@pytest.fixture(scope="module")
def short_run():
    cfg = DesignConfig(omega_d=0.6, seed=3)
    return cfg, pso_optimize(default_candidates(), cfg)


def test_pso_trace_and_bounds(short_run):
    cfg, res = short_run
    assert np.all(np.diff(res.objective_trace) >= 0)
    assert len(res.objective_trace) == cfg.n_iters + 1
    assert 2.0 <= res.alpha_star <= 5.0 and 1.0 <= res.beta_star <= 20.0
    assert res.objective == res.objective_trace[-1]
    f, c, _ = objective(res.alpha_star, res.beta_star, default_candidates(), cfg, cfg.seed)
    assert f == res.objective
    assert c.to_dict() == res.constellation.to_dict()


def test_pso_beats_random_points(short_run):
    cfg, res = short_run
    rng = stream(99)
    for a, b in zip(rng.uniform(2, 5, 20), rng.uniform(1, 20, 20)):
        assert res.objective >= objective(a, b, default_candidates(), cfg, cfg.seed)[0]


def test_pso_deterministic(short_run):
    cfg, res = short_run
    again = pso_optimize(default_candidates(), cfg)
    assert again.to_dict() == res.to_dict()


def test_radar_weight_pushes_alpha_up():
    alphas = [pso_optimize(default_candidates(), DesignConfig(omega_d=1.0, n_iters=300, seed=s)).alpha_star
              for s in range(5)]
    assert np.median(alphas) >= 2.0 + 0.75 * 3.0


def test_config_validation():
    with pytest.raises(ValueError):
        DesignConfig(omega_d=1.5)
    with pytest.raises(ValueError):
        DesignConfig(alpha_bounds=(5.0, 2.0))
    with pytest.raises(ValueError):
        DesignConfig(likelihood="other")
