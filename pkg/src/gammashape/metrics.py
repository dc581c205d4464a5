"""Communication and sensing metrics of a constellation.

Mutual information over the AWGN channel is estimated by Monte Carlo;
detection probability uses the Albersheim logistic approximation, with the
exact Rice (Marcum-Q) value available for comparison.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import expit
from scipy.stats import ncx2

from .constellation import Constellation
from .rng import chunk_sizes, complex_normal, stream

__all__ = [
    "ChannelConfig",
    "MetricReport",
    "ebn0_to_noise_variance",
    "conditional_entropy_awgn",
    "mutual_information_mc",
    "mi_estimate",
    "normalized_mi",
    "albersheim_pd",
    "exact_pd_rice",
    "average_pd",
    "evaluate_constellation",
]

SNR_FLOOR = 1e-12
_CHUNK = 1 << 15


def ebn0_to_noise_variance(ebn0_db: float, M: int, P: float = 1.0) -> float:
    """Noise variance giving SNR = (Eb/N0) log2(M) at signal power P."""
    return P / (10.0 ** (ebn0_db / 10.0) * math.log2(M))


@dataclass(frozen=True)
class ChannelConfig:
    sigma_c2: float
    sigma_r2: float
    zeta_r: complex = 1.0 + 0.0j
    p_fa: float = 1e-3

    def __post_init__(self):
        if not (self.sigma_c2 > 0 and self.sigma_r2 > 0):
            raise ValueError("noise variances must be positive")
        if not 0 < self.p_fa < 1:
            raise ValueError(f"p_fa must lie in (0, 1), got {self.p_fa}")

    @classmethod
    def from_ebn0(cls, ebn0_db: float, M: int, P: float = 1.0, p_fa: float = 1e-3,
                  zeta_r: complex = 1.0 + 0.0j) -> "ChannelConfig":
        s2 = ebn0_to_noise_variance(ebn0_db, M, P)
        return cls(s2, s2, zeta_r, p_fa)


@dataclass(frozen=True)
class MetricReport:
    mi_bits: float
    mi_normalized: float
    avg_pd: float
    per_point_pd: list = field(default_factory=list)
    mi_stderr: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def conditional_entropy_awgn(sigma_c2: float) -> float:
    """h(Y|X) = log2(pi e sigma^2) bits for circular complex AWGN."""
    if not sigma_c2 > 0:
        raise ValueError("sigma_c2 must be positive")
    return math.log2(math.pi * math.e * sigma_c2)


def mi_estimate(constellation: Constellation, sigma_c2: float, n_mc: int, seed: int,
                stratified: bool = False):
    """Monte-Carlo I(X; Y) in bits with its standard error.

    Each trial sends a uniformly drawn symbol (or cycles through the
    alphabet if ``stratified``), adds noise and scores
    -log2((1/M) sum_i f(y | x_i)) in the log domain.
    """
    if n_mc < 100:
        raise ValueError("n_mc must be at least 100")
    if not sigma_c2 > 0:
        raise ValueError("sigma_c2 must be positive")
    x = constellation.points
    M = len(x)
    sums, sqs = [], []
    done = 0
    for k, n in enumerate(chunk_sizes(n_mc, _CHUNK)):
        rng = stream(seed, 31, k)
        if stratified:
            idx = (np.arange(done, done + n) % M)
        else:
            idx = rng.integers(0, M, size=n)
        y = x[idx] + complex_normal(rng, n, sigma_c2)
        diff = y[:, None] - x[None, :]
        expo = -(diff.real ** 2 + diff.imag ** 2) / sigma_c2
        m = expo.max(axis=1)
        lse = m + np.log(np.exp(expo - m[:, None]).sum(axis=1))
        # -log2 f_Y(y) with f_Y = (1/M) sum_i exp(expo_i) / (pi sigma^2)
        nl = -(lse - math.log(M) - math.log(math.pi * sigma_c2)) / math.log(2.0)
        sums.append(math.fsum(nl))
        sqs.append(math.fsum(nl * nl))
        done += n
    mean = math.fsum(sums) / n_mc
    var = max(math.fsum(sqs) / n_mc - mean * mean, 0.0)
    R = mean - conditional_entropy_awgn(sigma_c2)
    return R, math.sqrt(var / n_mc)


def mutual_information_mc(constellation: Constellation, sigma_c2: float, n_mc: int, seed: int,
                          stratified: bool = False) -> float:
    return mi_estimate(constellation, sigma_c2, n_mc, seed, stratified)[0]


def normalized_mi(R: float, M: int) -> float:
    if M < 2:
        raise ValueError("M must be at least 2")
    return R / math.log2(M)


def albersheim_pd(snr_linear, p_fa: float, snr_form: str = "db"):
    """Albersheim detection probability.

    With B = ln(0.62 / p_fa), P_d = logistic((s - B) / (0.12 B + 1.7)),
    where s is the SNR in dB (``snr_form="db"``, the default) or the
    linear SNR itself (``snr_form="linear"``).
    """
    if not 0 < p_fa < 0.62:
        raise ValueError(f"Albersheim needs 0 < p_fa < 0.62, got {p_fa}")
    snr = np.asarray(snr_linear, dtype=float)
    if np.any(snr <= 0):
        raise ValueError("snr_linear must be positive")
    B = math.log(0.62 / p_fa)
    if snr_form == "db":
        s = 10.0 * np.log10(snr)
    elif snr_form == "linear":
        s = snr
    else:
        raise ValueError(f"unknown snr_form {snr_form!r}")
    out = expit((s - B) / (0.12 * B + 1.7))
    return float(out) if out.ndim == 0 else out


def exact_pd_rice(rho, sigma_r2: float, p_fa: float):
    """Neyman-Pearson envelope-detector P_d for a steady target.

    The threshold satisfies p_fa = exp(-V_T^2 / sigma_r2). Above it the
    Rice tail equals the Marcum Q1 function, evaluated as a noncentral
    chi-square survival function with 2 degrees of freedom.
    """
    if not sigma_r2 > 0:
        raise ValueError("sigma_r2 must be positive")
    if not 0 < p_fa < 1:
        raise ValueError("p_fa must lie in (0, 1)")
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0):
        raise ValueError("rho must be non-negative")
    thr = -2.0 * math.log(p_fa)
    nc = 2.0 * r * r / sigma_r2
    out = np.where(nc > 0, ncx2.sf(thr, 2, np.maximum(nc, 1e-300)), p_fa)
    return float(out) if out.ndim == 0 else out


def average_pd(constellation: Constellation, sigma_r2: float, p_fa: float, snr_form: str = "db"):
    """Mean and per-point Albersheim P_d; zero-amplitude points use SNR 1e-12."""
    snr = np.maximum(np.abs(constellation.points) ** 2 / sigma_r2, SNR_FLOOR)
    per = np.atleast_1d(albersheim_pd(snr, p_fa, snr_form))
    return float(np.mean(per)), per.tolist()


def evaluate_constellation(constellation: Constellation, channel: ChannelConfig, n_mc: int = 1000,
                           seed: int = 0, snr_form: str = "db") -> MetricReport:
    R, se = mi_estimate(constellation, channel.sigma_c2, n_mc, seed)
    snr_scale = abs(channel.zeta_r) ** 2
    pd, per = average_pd(Constellation(constellation.points * math.sqrt(snr_scale),
                                       constellation.avg_power * snr_scale)
                         if snr_scale != 1.0 else constellation,
                         channel.sigma_r2, channel.p_fa, snr_form)
    return MetricReport(R, normalized_mi(R, constellation.M), pd, per, se)
