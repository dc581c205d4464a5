"""Analytical limits: Gamma-mixture PEP, SER union bound and reflection CRBs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .constellation import Constellation
from .gamma import EmConfig, GammaMixture, GammaParams, fit_gamma_mixture_em, squared_distance_samples
from .rng import chunk_sizes, complex_normal, stream
from .special import q_function, regularized_incomplete_beta

__all__ = [
    "PepResult",
    "CrbReport",
    "power_scaled_params",
    "pep_conditional",
    "average_pep_mixture",
    "average_pep_craig",
    "pep_mc",
    "fit_distance_mixture",
    "ser_union_bound",
    "mle_reflection",
    "mle_variance_mc",
    "crb_conditional",
    "crb_average",
    "crb_average_power_constrained",
    "crb_average_mc",
    "crb_mc_estimate",
    "crb_report",
]

INF = math.inf
_CHUNK = 1 << 20


@dataclass(frozen=True)
class PepResult:
    avg_pep: float
    per_component_terms: list
    gamma_ells: list
    provenance: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CrbReport:
    crb_conditional_per_point: list
    crb_average_closed_form: float
    crb_average_mc: float
    mle_variance_mc: list
    crb_average_mc_stderr: float = 0.0


def power_scaled_params(params: GammaParams, P: float = 1.0) -> GammaParams:
    """Same shape, scale chosen so that E[rho^2] = P."""
    return GammaParams(params.alpha, math.sqrt(P / (params.alpha * (params.alpha + 1.0))))


def pep_conditional(d_squared, sigma_c2: float):
    """Pairwise error probability Q(sqrt(D / (2 sigma^2)))."""
    if not sigma_c2 > 0:
        raise ValueError("sigma_c2 must be positive")
    d = np.asarray(d_squared, dtype=float)
    if np.any(d < 0):
        raise ValueError("d_squared must be non-negative")
    return q_function(np.sqrt(d / (2.0 * sigma_c2)) if d.ndim else math.sqrt(float(d) / (2.0 * sigma_c2)))


def average_pep_mixture(mix: GammaMixture, sigma_c2: float, provenance: dict | None = None) -> PepResult:
    """E[Q(sqrt(D / 2 sigma^2))] for D following a Gamma mixture.

    Each component contributes w/2 * I_{1/(1+g)}(alpha, 1/2) with
    g = beta / (4 sigma^2), the closed form of
    (1/pi) int_0^{pi/2} (sin^2 t / (sin^2 t + g))^alpha dt. The argument
    order (1/2, alpha) does not reproduce that integral.
    """
    if not sigma_c2 > 0:
        raise ValueError("sigma_c2 must be positive")
    gam = [float(b) / (4.0 * sigma_c2) for b in mix.betas]
    terms = [0.5 * float(w) * regularized_incomplete_beta(1.0 / (1.0 + g), float(a), 0.5)
             for w, a, g in zip(mix.weights, mix.alphas, gam)]
    return PepResult(math.fsum(terms), terms, gam, dict(provenance or {}))


def average_pep_craig(mix: GammaMixture, sigma_c2: float) -> float:
    """Same quantity through the MGF of D and the Craig form of Q."""
    w, a, b = mix.weights, mix.alphas, mix.betas

    def integrand(psi):
        s = math.sin(psi)
        if s == 0.0:
            return 0.0
        t = 1.0 / (4.0 * sigma_c2 * s * s)
        return float(np.sum(w * np.exp(-a * np.log1p(b * t))))

    val, _ = quad(integrand, 0.0, math.pi / 2.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val / math.pi


def pep_mc(d_samples, sigma_c2: float):
    """Sample mean and stderr of the conditional PEP over D samples."""
    p = pep_conditional(np.asarray(d_samples, dtype=float), sigma_c2)
    return float(np.mean(p)), float(np.std(p) / math.sqrt(len(p)))


def fit_distance_mixture(params: GammaParams, L: int, n: int = 10 ** 6, seed: int = 0, P: float = 1.0,
                         restarts: int = 5):
    """EM fit of the squared-distance law of a power-P Gamma constellation.

    Returns (EmFitResult, provenance dict).
    """
    scaled = power_scaled_params(params, P)
    d = squared_distance_samples(scaled, n, seed)
    fit = fit_gamma_mixture_em(d, EmConfig(L=L, restarts=restarts, seed=seed))
    prov = {"alpha": params.alpha, "beta": params.beta, "P": P, "L": L, "n": n, "seed": seed,
            "restarts": restarts}
    return fit, prov


def ser_union_bound(M: int, avg_pep: float):
    """(M - 1) * avg_pep; the flag is set when the bound exceeds 1."""
    if M < 2:
        raise ValueError("M must be at least 2")
    if not 0.0 <= avg_pep <= 0.5:
        raise ValueError("avg_pep must lie in [0, 0.5]")
    value = (M - 1) * avg_pep
    return value, value > 1.0


def mle_reflection(y_r, x_i):
    """zeta_hat = y x* / |x|^2."""
    x = np.asarray(x_i, dtype=complex)
    rho2 = np.abs(x) ** 2
    if np.any(rho2 == 0):
        raise ValueError("reflection MLE is undefined for a zero-amplitude symbol")
    out = np.asarray(y_r, dtype=complex) * np.conj(x) / rho2
    return complex(out) if out.ndim == 0 else out


def mle_variance_mc(x_i: complex, zeta_r: complex, sigma_r2: float, n: int, seed: int):
    """Mean and variance E|zeta_hat - mean|^2 of the MLE over n noisy echoes."""
    rng = stream(seed, 51)
    y = zeta_r * x_i + complex_normal(rng, int(n), sigma_r2)
    est = mle_reflection(y, x_i)
    mean = complex(np.mean(est))
    var = float(np.mean(np.abs(est - mean) ** 2)) * n / (n - 1)
    return mean, var


def crb_conditional(rho, sigma_r2: float):
    """sigma^2 / rho^2, infinite at rho = 0."""
    r = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(r > 0, sigma_r2 / np.where(r > 0, r * r, 1.0), INF)
    return float(out) if out.ndim == 0 else out


def crb_average(params: GammaParams, sigma_r2: float) -> float:
    """sigma^2 E[rho^-2] = sigma^2 / (beta^2 (a - 1)(a - 2)); infinite for a <= 2."""
    a, b = params.alpha, params.beta
    if a <= 2.0:
        return INF
    return sigma_r2 / (b * b * (a - 1.0) * (a - 2.0))


def crb_average_power_constrained(alpha: float, P: float, sigma_r2: float) -> float:
    if not (P > 0 and sigma_r2 > 0):
        raise ValueError("P and sigma_r2 must be positive")
    if alpha <= 2.0:
        return INF
    return sigma_r2 / P * alpha * (alpha + 1.0) / ((alpha - 1.0) * (alpha - 2.0))


def crb_mc_estimate(params: GammaParams, sigma_r2: float, n: int, seed: int):
    """Sample mean of sigma^2 / rho^2 over Gamma draws, with its stderr."""
    if n < 10 ** 4:
        raise ValueError("n must be at least 1e4")
    s1, s2 = [], []
    for k, m in enumerate(chunk_sizes(n, _CHUNK)):
        rho = stream(seed, 52, k).gamma(params.alpha, params.beta, size=m)
        inv = 1.0 / (rho * rho)
        s1.append(math.fsum(inv))
        s2.append(math.fsum(inv * inv))
    mean = math.fsum(s1) / n
    var = max(math.fsum(s2) / n - mean * mean, 0.0)
    return sigma_r2 * mean, sigma_r2 * math.sqrt(var / n)


def crb_average_mc(params: GammaParams, sigma_r2: float, n: int, seed: int) -> float:
    return crb_mc_estimate(params, sigma_r2, n, seed)[0]


def crb_report(constellation: Constellation, params: GammaParams, sigma_r2: float, n_mc: int = 10 ** 6,
               seed: int = 0, zeta_r: complex = 1.0) -> CrbReport:
    """Per-point conditional CRBs and MLE variances plus the averaged bound.

    The averaged bound uses the power-P scaling of the Gamma law so it is
    comparable with the constellation.
    """
    scaled = power_scaled_params(params, constellation.avg_power)
    per = [float(crb_conditional(abs(x), sigma_r2)) for x in constellation.points]
    mle = [mle_variance_mc(complex(x), zeta_r, sigma_r2, n_mc, seed + i)[1]
           for i, x in enumerate(constellation.points)]
    mc, se = crb_mc_estimate(scaled, sigma_r2, n_mc, seed)
    return CrbReport(per, crb_average(scaled, sigma_r2), mc, mle, se)
