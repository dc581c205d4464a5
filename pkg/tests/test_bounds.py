import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gammashape.bounds import (
    average_pep_craig,
    average_pep_mixture,
    crb_average,
    crb_average_mc,
    crb_average_power_constrained,
    crb_conditional,
    crb_mc_estimate,
    mle_reflection,
    mle_variance_mc,
    pep_conditional,
    pep_mc,
    power_scaled_params,
    ser_union_bound,
)
from gammashape.gamma import GammaMixture, GammaParams, mixture_sample
from gammashape.special import q_function


def test_pep_conditional_values():
    assert pep_conditional(0.0, 1.0) == 0.5
    assert pep_conditional(8 * 0.3, 0.3) == pytest.approx(0.0227501319481792072, rel=1e-13)


def test_pep_conditional_monotone():
    d = np.linspace(0, 50, 500)
    assert np.all(np.diff(pep_conditional(d, 0.7)) < 0)


def test_pep_exponential_closed_form():
    # D ~ Exp(beta): 1/2 (1 - sqrt(gamma / (1 + gamma))), the Rayleigh-fading PEP
    mix = GammaMixture([1.0], [1.0], [3.0 * 4 * 0.2])
    r = average_pep_mixture(mix, 0.2)
    assert r.gamma_ells == [pytest.approx(3.0)]
    assert r.avg_pep == pytest.approx(0.5 * (1 - math.sqrt(0.75)), abs=1e-12)
    assert r.avg_pep == pytest.approx(average_pep_craig(mix, 0.2), abs=1e-12)


def test_swapped_beta_order_is_not_the_integral():
    # I_x(1/2, 1) / 2 = sqrt(x) / 2 gives 0.25 at gamma = 3, far from the integral
    from gammashape.special import regularized_incomplete_beta

    mix = GammaMixture([1.0], [1.0], [3.0 * 4 * 0.2])
    swapped = 0.5 * regularized_incomplete_beta(0.25, 0.5, 1.0)
    assert swapped == pytest.approx(0.25, abs=1e-12)
    assert abs(swapped - average_pep_craig(mix, 0.2)) > 0.1


@pytest.mark.parametrize("a,g,val", [(2.7, 0.4, 0.0986850078063534), (0.6, 5.0, 0.105982118224881)])
def test_pep_component_oracle(a, g, val):
    # mpmath quadrature of (1/pi) int (sin^2 / (sin^2 + g))^a
    mix = GammaMixture([1.0], [a], [4 * g * 0.1])
    assert average_pep_mixture(mix, 0.1).avg_pep == pytest.approx(val, rel=1e-12)


def test_pep_no_signal_limit():
    mix = GammaMixture([0.3, 0.7], [1.5, 4.0], [0.2, 1.0])
    assert average_pep_mixture(mix, 1e12).avg_pep == pytest.approx(0.5, abs=1e-6)


def test_pep_decreasing_in_snr():
    mix = GammaMixture([0.3, 0.7], [1.5, 4.0], [0.2, 1.0])
    vals = [average_pep_mixture(mix, s2).avg_pep for s2 in np.logspace(1, -3, 40)]
    assert np.all(np.diff(vals) < 0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 20), st.floats(0.05, 5), st.floats(1e-3, 10), st.floats(0.5, 8), st.floats(0.01, 0.99))
def test_closed_form_matches_craig(a1, b1, s2, a2, w):
    mix = GammaMixture([w, 1 - w], [a1, a2], [b1, 0.5])
    r = average_pep_mixture(mix, s2)
    assert r.avg_pep == pytest.approx(math.fsum(r.per_component_terms), abs=1e-12)
    assert 0 <= r.avg_pep <= 0.5
    assert r.avg_pep == pytest.approx(average_pep_craig(mix, s2), abs=1e-8)


def test_pep_matches_mc_over_mixture_samples():
    mix = GammaMixture([0.2, 0.5, 0.3], [0.8, 2.0, 6.0], [0.5, 1.0, 0.3])
    d = mixture_sample(mix, 2 * 10 ** 6, 1)
    mc, se = pep_mc(d, 0.1)
    assert average_pep_mixture(mix, 0.1).avg_pep == pytest.approx(mc, abs=4 * se)


@pytest.mark.parametrize("M,p,v,flag", [(16, 0.01, 0.15, False), (2, 0.3, 0.3, False), (16, 0.4, 6.0, True)])
def test_union_bound(M, p, v, flag):
    val, vac = ser_union_bound(M, p)
    assert val == pytest.approx(v, rel=1e-14)
    assert vac is flag


def test_union_bound_domain():
    with pytest.raises(ValueError):
        ser_union_bound(1, 0.1)
    with pytest.raises(ValueError):
        ser_union_bound(4, 0.6)


@pytest.mark.parametrize("zeta", [2 + 1j, 3j, -0.5])
def test_mle_noiseless(zeta):
    for x in (1.0, 0.3 - 2j, 1j):
        assert mle_reflection(zeta * x, x) == pytest.approx(zeta, rel=1e-14)


def test_mle_linear_and_degenerate():
    x = 0.7 + 0.2j
    y1, y2 = 1.0 + 2j, -3.0 + 0.5j
    assert mle_reflection(2 * y1 + 3 * y2, x) == pytest.approx(2 * mle_reflection(y1, x) + 3 * mle_reflection(y2, x))
    with pytest.raises(ValueError):
        mle_reflection(1.0, 0.0)


@pytest.mark.parametrize("x", [1.0, 0.4 + 0.3j, 1.8j])
def test_mle_unbiased_and_efficient(x):
    n, s2 = 10 ** 6, 0.25
    mean, var = mle_variance_mc(x, 1.0, s2, n, 11)
    crb = crb_conditional(abs(x), s2)
    assert abs(mean - 1.0) < 4 * math.sqrt(crb / n)
    assert var == pytest.approx(crb, rel=0.01)


def test_crb_conditional_values():
    assert crb_conditional(1.0, 1.0) == 1.0
    assert crb_conditional(2.0, 1.0) == 0.25
    assert crb_conditional(0.0, 1.0) == math.inf


@pytest.mark.parametrize("a,b,val", [(3.0, 1.0, 0.5), (4.71, 1.0, 1 / (3.71 * 2.71))])
def test_crb_average_values(a, b, val):
    assert crb_average(GammaParams(a, b), 1.0) == pytest.approx(val, rel=1e-14)
    assert crb_average_mc(GammaParams(a, b), 1.0, 10 ** 7, 2) == pytest.approx(val, rel=0.02)


@pytest.mark.parametrize("a", [2.0, 1.5])
def test_crb_average_divergent(a):
    assert crb_average(GammaParams(a, 1.0), 1.0) == math.inf
    assert crb_average_power_constrained(a, 1.0, 1.0) == math.inf


def test_crb_power_constrained():
    assert crb_average_power_constrained(3.0, 1.0, 1.0) == pytest.approx(6.0, rel=1e-14)
    assert crb_average_power_constrained(1e6, 1.0, 1.0) == pytest.approx(1.000004, rel=1e-9)
    grid = [2.1, 2.5, 3, 5, 10, 100]
    vals = [crb_average_power_constrained(a, 1.0, 1.0) for a in grid]
    assert np.all(np.diff(vals) < 0)


@given(st.floats(2.01, 50), st.floats(0.01, 10), st.floats(0.01, 10))
def test_crb_power_identity(a, P, s2):
    p = power_scaled_params(GammaParams(a, 1.0), P)
    assert crb_average(p, s2) == pytest.approx(crb_average_power_constrained(a, P, s2), rel=1e-12)


def test_crb_mc_scaling_and_heavy_tail():
    p = GammaParams(2.05, 1.0)
    v1, se1 = crb_mc_estimate(p, 1.0, 10 ** 5, 4)
    v2, se2 = crb_mc_estimate(p, 2.0, 10 ** 5, 4)
    assert v2 == 2 * v1 and se2 == 2 * se1
    assert math.isfinite(v1) and se1 > 0
    with pytest.raises(ValueError):
        crb_mc_estimate(p, 1.0, 100, 0)


def test_psk_crb_is_noise_variance():
    from gammashape.constellation import psk

    c = psk(16, 1.0)
    s2 = 0.0371
    assert all(crb_conditional(abs(x), s2) == pytest.approx(s2, rel=1e-15) for x in c.points)
