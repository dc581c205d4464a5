"""Likelihood-guided constellation selection and PSO over (alpha, beta).

A Gamma amplitude law scores every candidate of an APSK grid; a greedy
pass picks M points trading likelihood against spread, and particle swarm
optimization searches the Gamma parameters for the best weighted sum of
detection probability and normalized mutual information.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import xlogy

from .constellation import CandidateSet, Constellation, generate_apsk, normalize_power, pairwise_distance_sum
from .gamma import GammaParams, gamma_pdf
from .metrics import (
    MetricReport,
    average_pd,
    ebn0_to_noise_variance,
    mi_estimate,
    normalized_mi,
)
from .rng import DEFAULT_SEED, stream
from .special import ln_gamma

__all__ = [
    "DesignConfig",
    "DesignResult",
    "ebn0_to_sigma2",
    "default_candidates",
    "point_likelihood",
    "log_point_likelihood",
    "select_constellation",
    "objective",
    "pso_optimize",
]

# Default candidate grid: 8 rings of 8 points, outer radius 8 (unit ring spacing).
DEFAULT_GRID = (8, 8, 8.0)

ebn0_to_sigma2 = ebn0_to_noise_variance


def default_candidates() -> CandidateSet:
    return generate_apsk(*DEFAULT_GRID)


@dataclass(frozen=True)
class DesignConfig:
    omega_d: float = 0.6
    M: int = 16
    alpha_bounds: tuple = (2.0, 5.0)
    beta_bounds: tuple = (1.0, 20.0)
    lam: float = 0.05
    P: float = 1.0
    n_mc: int = 1000
    pfa: float = 1e-3
    sigma_c2: float = ebn0_to_noise_variance(10.0, 16)
    sigma_r2: float = ebn0_to_noise_variance(10.0, 16)
    n_particles: int = 5
    n_iters: int = 1000
    seed: int = DEFAULT_SEED
    likelihood: str = "planar"
    snr_form: str = "db"
    inertia: float = 0.7298
    c_cognitive: float = 1.49618
    c_social: float = 1.49618
    vmax_fraction: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.omega_d <= 1.0:
            raise ValueError("omega_d must lie in [0, 1]")
        for lo, hi in (self.alpha_bounds, self.beta_bounds):
            if not lo < hi:
                raise ValueError("bounds must satisfy min < max")
        if self.alpha_bounds[0] <= 0 or self.beta_bounds[0] <= 0:
            raise ValueError("Gamma parameter bounds must be positive")
        if self.M < 2 or self.lam < 0 or not self.P > 0:
            raise ValueError("need M >= 2, lambda >= 0, P > 0")
        if self.likelihood not in ("planar", "amplitude"):
            raise ValueError(f"unknown likelihood {self.likelihood!r}")
        if self.n_particles < 1 or self.n_iters < 0:
            raise ValueError("need at least one particle and non-negative iterations")

    @classmethod
    def at_ebn0(cls, ebn0_db: float, **kw) -> "DesignConfig":
        M = kw.get("M", 16)
        P = kw.get("P", 1.0)
        s2 = ebn0_to_noise_variance(ebn0_db, M, P)
        return cls(sigma_c2=s2, sigma_r2=s2, **kw)


@dataclass(frozen=True, eq=False)
class DesignResult:
    alpha_star: float
    beta_star: float
    constellation: Constellation
    objective: float
    objective_trace: list
    metrics: MetricReport
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {
            "alpha_star": self.alpha_star,
            "beta_star": self.beta_star,
            "objective": self.objective,
            "objective_trace": list(self.objective_trace),
            "evaluations": self.evaluations,
            "constellation": self.constellation.to_dict(),
            "metrics": self.metrics.to_dict(),
        }


def point_likelihood(x: complex, params: GammaParams) -> float:
    """Uniform-phase likelihood gamma_pdf(|x|) / (2 pi)."""
    return gamma_pdf(abs(x), params) / (2.0 * math.pi)


def log_point_likelihood(points, params: GammaParams, likelihood: str = "planar"):
    """Log selection score of each point.

    ``"amplitude"`` is ln(f(rho) / 2 pi), the density over (rho, phi).
    ``"planar"`` divides by rho as well, giving the density of the point on
    the complex plane.
    """
    if likelihood not in ("planar", "amplitude"):
        raise ValueError(f"unknown likelihood {likelihood!r}")
    rho = np.abs(np.asarray(points, dtype=complex))
    a, b = params.alpha, params.beta
    power = a - 1.0 if likelihood == "amplitude" else a - 2.0
    if np.any(rho == 0) and power < 0:
        raise ValueError(f"{likelihood} likelihood diverges at 0 for alpha={a}")
    c = ln_gamma(a) + a * math.log(b) + math.log(2.0 * math.pi)
    return xlogy(power, rho) - rho / b - c


def _first_max(g, rtol=1e-12):
    # lowest index within rounding of the maximum, so symmetric ties resolve
    # identically for rotated copies of the grid
    top = g.max()
    return int(np.flatnonzero(g >= top - rtol * (1.0 + abs(top)))[0])


def select_constellation(candidates: CandidateSet, params: GammaParams, M: int, lam: float = 0.05,
                         P: float = 1.0, likelihood: str = "planar") -> Constellation:
    """Greedy M-point selection, normalized to average power P.

    The first point maximizes the likelihood; each next point maximizes
    ln L(x) + lam * min_s |x - s|^2 over the points already chosen. Ties go
    to the earliest candidate.
    """
    pts = np.asarray(candidates.points, dtype=complex)
    if M > len(pts):
        raise ValueError(f"M={M} exceeds the {len(pts)} candidates")
    if M < 2:
        raise ValueError("M must be at least 2")
    ll = log_point_likelihood(pts, params, likelihood)
    used = np.zeros(len(pts), dtype=bool)
    first = _first_max(ll)
    chosen = [first]
    used[first] = True
    d = pts - pts[first]
    mind = d.real ** 2 + d.imag ** 2
    for _ in range(M - 1):
        g = np.where(used, -np.inf, ll + lam * mind)
        i = _first_max(g)
        chosen.append(i)
        used[i] = True
        d = pts - pts[i]
        mind = np.minimum(mind, d.real ** 2 + d.imag ** 2)
    sel = pts[np.array(chosen)]
    if lam > 0 and not pairwise_distance_sum(sel) > lam:
        warnings.warn("selected set violates the spread constraint sum |xi - xj|^2 > lambda", RuntimeWarning)
    return normalize_power(sel, P)


def objective(alpha: float, beta: float, candidates: CandidateSet, config: DesignConfig, seed: int):
    """F = omega_d * mean P_d + (1 - omega_d) * normalized MI.

    Returns (F, constellation, MetricReport). The MI noise is drawn from
    ``seed`` so repeated calls share common random numbers.
    """
    (alo, ahi), (blo, bhi) = config.alpha_bounds, config.beta_bounds
    tol = 1e-12
    if not (alo - tol <= alpha <= ahi + tol and blo - tol <= beta <= bhi + tol):
        raise ValueError(f"(alpha, beta)=({alpha}, {beta}) outside bounds")
    const = select_constellation(candidates, GammaParams(alpha, beta), config.M, config.lam,
                                 config.P, config.likelihood)
    w = config.omega_d
    pd, per = average_pd(const, config.sigma_r2, config.pfa, config.snr_form)
    if w < 1.0:
        R, se = mi_estimate(const, config.sigma_c2, config.n_mc, seed)
    else:
        R, se = float("nan"), float("nan")
    rbar = normalized_mi(R, config.M)
    F = pd if w == 1.0 else (rbar if w == 0.0 else w * pd + (1.0 - w) * rbar)
    return float(F), const, MetricReport(R, rbar, pd, per, se)


def pso_optimize(candidates: CandidateSet, config: DesignConfig) -> DesignResult:
    """Synchronous particle swarm over the (alpha, beta) box.

    Constriction-type constants, velocity clamped to a fraction of each
    range and reflecting walls. Particle p draws from its own substream;
    every objective call reuses the same Monte-Carlo seed.
    """
    lo = np.array([config.alpha_bounds[0], config.beta_bounds[0]], dtype=float)
    hi = np.array([config.alpha_bounds[1], config.beta_bounds[1]], dtype=float)
    vmax = config.vmax_fraction * (hi - lo)
    n_p = config.n_particles
    rngs = [stream(config.seed, 41, p) for p in range(n_p)]
    pos = np.array([r.uniform(lo, hi) for r in rngs])
    vel = np.array([r.uniform(-vmax, vmax) for r in rngs])
    mc_seed = config.seed

    def evaluate(x):
        return objective(float(x[0]), float(x[1]), candidates, config, mc_seed)

    evals = [evaluate(x) for x in pos]
    pbest = pos.copy()
    pbest_f = np.array([e[0] for e in evals])
    g = int(np.argmax(pbest_f))
    gbest, gbest_f, gbest_eval = pbest[g].copy(), float(pbest_f[g]), evals[g]
    trace = [gbest_f]
    n_evals = n_p
    for _ in range(config.n_iters):
        for p in range(n_p):
            r1, r2 = rngs[p].random(2), rngs[p].random(2)
            vel[p] = (config.inertia * vel[p] + config.c_cognitive * r1 * (pbest[p] - pos[p])
                      + config.c_social * r2 * (gbest - pos[p]))
        vel = np.clip(vel, -vmax, vmax)
        pos = pos + vel
        low, high = pos < lo, pos > hi
        pos = np.where(low, 2 * lo - pos, pos)
        pos = np.where(high, 2 * hi - pos, pos)
        vel = np.where(low | high, -vel, vel)
        pos = np.clip(pos, lo, hi)
        evals = [evaluate(x) for x in pos]
        n_evals += n_p
        for p, e in enumerate(evals):
            if e[0] > pbest_f[p]:
                pbest_f[p] = e[0]
                pbest[p] = pos[p]
        # synchronous reduction: global best updated once per iteration
        for p, e in enumerate(evals):
            if e[0] > gbest_f:
                gbest_f, gbest, gbest_eval = float(e[0]), pos[p].copy(), e
        trace.append(gbest_f)
    _, const, report = gbest_eval
    return DesignResult(float(gbest[0]), float(gbest[1]), const, gbest_f, trace, report, n_evals)
