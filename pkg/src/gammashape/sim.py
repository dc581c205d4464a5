"""Monte-Carlo ground truth for SER (ML detection) and detection probability."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import average_pep_mixture, crb_average, crb_mc_estimate, power_scaled_params, ser_union_bound
from .constellation import Constellation
from .gamma import GammaMixture, GammaParams
from .metrics import ChannelConfig, ebn0_to_noise_variance
from .rng import DEFAULT_SEED, chunk_sizes, complex_normal, stream

__all__ = [
    "SimConfig",
    "SimResult",
    "SWEEP_COLUMNS",
    "awgn_channel",
    "radar_channel",
    "ml_detect",
    "simulate_ser",
    "simulate_detection",
    "simulate_pd",
    "simulate_point",
    "sweep_ebn0",
]

SWEEP_COLUMNS = ("ebn0_db", "ser", "ser_stderr", "pd", "pd_stderr", "union_bound", "crb_closed", "crb_mc")
_CHUNK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    n_symbols: int = 10 ** 6
    seed: int = DEFAULT_SEED
    ebn0_db: float = 10.0
    channel: ChannelConfig | None = None
    n_pd_trials: int = 10 ** 5
    n_crb: int = 10 ** 6

    def __post_init__(self):
        if self.n_symbols < 10 ** 3 or self.n_pd_trials < 10 ** 3:
            raise ValueError("need at least 1e3 trials")


@dataclass(frozen=True)
class SimResult:
    ser: float
    ser_stderr: float
    pd_empirical: float
    pd_stderr: float
    n_symbols: int
    pfa_empirical: float = float("nan")

    def to_dict(self) -> dict:
        return asdict(self)


def _binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def awgn_channel(x, sigma_c2: float, rng: np.random.Generator):
    """y = x + n, n ~ CN(0, sigma_c2)."""
    x = np.asarray(x, dtype=complex)
    y = x + complex_normal(rng, x.size, sigma_c2).reshape(x.shape)
    return complex(y) if y.ndim == 0 else y


def radar_channel(x, zeta_r: complex, sigma_r2: float, rng: np.random.Generator):
    """y = zeta_r x + n, n ~ CN(0, sigma_r2)."""
    x = np.asarray(x, dtype=complex)
    y = zeta_r * x + complex_normal(rng, x.size, sigma_r2).reshape(x.shape)
    return complex(y) if y.ndim == 0 else y


def ml_detect(y, constellation: Constellation):
    """Nearest-point index; argmin keeps the lowest index on ties."""
    pts = constellation.points
    yy = np.atleast_1d(np.asarray(y, dtype=complex))
    d = yy[:, None] - pts[None, :]
    idx = np.argmin(d.real ** 2 + d.imag ** 2, axis=1)
    return int(idx[0]) if np.ndim(y) == 0 else idx


def simulate_ser(constellation: Constellation, sigma_c2: float, n: int, seed: int):
    """Empirical symbol error rate and its binomial stderr."""
    if n < 10 ** 3:
        raise ValueError("n must be at least 1e3")
    M = constellation.M
    errors = 0
    for k, m in enumerate(chunk_sizes(n, _CHUNK)):
        rng = stream(seed, 61, k)
        idx = rng.integers(0, M, size=m)
        y = awgn_channel(constellation.points[idx], sigma_c2, rng)
        errors += int(np.count_nonzero(ml_detect(y, constellation) != idx))
    p = errors / n
    return p, _binomial_stderr(p, n)


def simulate_detection(constellation: Constellation, sigma_r2: float, p_fa: float, n: int, seed: int,
                       zeta_r: complex = 1.0) -> dict:
    """Envelope detector with the Neyman-Pearson threshold.

    Target-present trials use uniformly drawn symbols; an equal number of
    interleaved noise-only trials measure the false-alarm rate.
    """
    if n < 10 ** 3:
        raise ValueError("n must be at least 1e3")
    thr2 = -sigma_r2 * math.log(p_fa)
    M = constellation.M
    hits = 0
    alarms = 0
    for k, m in enumerate(chunk_sizes(n, _CHUNK)):
        rng = stream(seed, 62, k)
        idx = rng.integers(0, M, size=m)
        y = radar_channel(constellation.points[idx], zeta_r, sigma_r2, rng)
        hits += int(np.count_nonzero(y.real ** 2 + y.imag ** 2 > thr2))
        z = complex_normal(rng, m, sigma_r2)
        alarms += int(np.count_nonzero(z.real ** 2 + z.imag ** 2 > thr2))
    pd = hits / n
    pf = alarms / n
    return {"pd": pd, "pd_stderr": _binomial_stderr(pd, n), "pfa": pf, "pfa_stderr": _binomial_stderr(pf, n)}


def simulate_pd(constellation: Constellation, sigma_r2: float, p_fa: float, n: int, seed: int,
                zeta_r: complex = 1.0):
    r = simulate_detection(constellation, sigma_r2, p_fa, n, seed, zeta_r)
    return r["pd"], r["pd_stderr"]


def simulate_point(constellation: Constellation, config: SimConfig) -> SimResult:
    ch = config.channel
    if ch is None:
        s2 = ebn0_to_noise_variance(config.ebn0_db, constellation.M, constellation.avg_power)
        ch = ChannelConfig(s2, s2)
    ser, se = simulate_ser(constellation, ch.sigma_c2, config.n_symbols, config.seed)
    det = simulate_detection(constellation, ch.sigma_r2, ch.p_fa, config.n_pd_trials, config.seed, ch.zeta_r)
    return SimResult(ser, se, det["pd"], det["pd_stderr"], config.n_symbols, det["pfa"])


def sweep_ebn0(constellation: Constellation, ebn0_grid_db, config: SimConfig,
               params: GammaParams | None = None, mixture: GammaMixture | None = None,
               p_fa: float = 1e-3, threads: int = 1) -> list:
    """One row per Eb/N0 point with the columns of ``SWEEP_COLUMNS``.

    Union-bound columns need ``mixture`` (fitted to the power-normalized
    distance law); CRB columns need ``params``. Missing inputs give NaN.
    """
    grid = list(ebn0_grid_db)
    if not grid:
        raise ValueError("empty Eb/N0 grid")
    P = constellation.avg_power

    def row(k):
        eb = float(grid[k])
        s2 = ebn0_to_noise_variance(eb, constellation.M, P)
        seed = config.seed + 1000 * k
        ser, se = simulate_ser(constellation, s2, config.n_symbols, seed)
        pd, pse = simulate_pd(constellation, s2, p_fa, config.n_pd_trials, seed)
        ub = crb_c = crb_m = float("nan")
        if mixture is not None:
            ub = ser_union_bound(constellation.M, average_pep_mixture(mixture, s2).avg_pep)[0]
        if params is not None:
            scaled = power_scaled_params(params, P)
            crb_c = crb_average(scaled, s2)
            crb_m = crb_mc_estimate(scaled, s2, config.n_crb, config.seed)[0]
        return dict(zip(SWEEP_COLUMNS, (eb, ser, se, pd, pse, ub, crb_c, crb_m)))

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(row, range(len(grid))))
    return [row(k) for k in range(len(grid))]
