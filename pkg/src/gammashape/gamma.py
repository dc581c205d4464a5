"""Gamma amplitude law, Gamma mixtures and their EM fit.

Scale parameterization throughout: mean = alpha * beta.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np
from scipy.special import gammainc

from .rng import stream
from .special import digamma, ln_gamma, log_minus_digamma, trigamma

__all__ = [
    "GammaParams",
    "GammaMixture",
    "EmConfig",
    "EmFitResult",
    "EmFailure",
    "gamma_logpdf",
    "gamma_pdf",
    "gamma_sample",
    "squared_distance",
    "squared_distance_samples",
    "mixture_pdf",
    "mixture_cdf",
    "mixture_mgf",
    "mixture_sample",
    "log_likelihood",
    "solve_shape",
    "minka_shape",
    "fit_gamma_mixture_em",
    "method_of_moments_single",
    "kl_divergence_empirical",
]


class EmFailure(ArithmeticError):
    """Every EM restart broke down numerically."""


@dataclass(frozen=True)
class GammaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"Gamma parameters must be positive, got {self}")

    @property
    def mean(self) -> float:
        return self.alpha * self.beta

    @property
    def second_moment(self) -> float:
        return self.beta ** 2 * self.alpha * (self.alpha + 1)


@dataclass(frozen=True, eq=False)
class GammaMixture:
    weights: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        a = np.atleast_1d(np.asarray(self.alphas, dtype=float))
        b = np.atleast_1d(np.asarray(self.betas, dtype=float))
        if not (len(w) == len(a) == len(b) >= 1):
            raise ValueError("mixture arrays must share a length >= 1")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must be non-negative and sum to 1, got {w}")
        if np.any(a <= 0) or np.any(b <= 0):
            raise ValueError("component shapes and scales must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", b)

    @property
    def L(self) -> int:
        return len(self.weights)

    @classmethod
    def single(cls, params: GammaParams) -> "GammaMixture":
        return cls([1.0], [params.alpha], [params.beta])

    def to_dict(self, log_likelihood: float | None = None) -> dict:
        out = {
            "components": [
                {"w": float(w), "alpha": float(a), "beta": float(b)}
                for w, a, b in zip(self.weights, self.alphas, self.betas)
            ]
        }
        if log_likelihood is not None:
            out["log_likelihood"] = float(log_likelihood)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "GammaMixture":
        comps = data["components"]
        w = np.array([c["w"] for c in comps], dtype=float)
        return cls(w / w.sum(), [c["alpha"] for c in comps], [c["beta"] for c in comps])

    @classmethod
    def from_json(cls, path) -> "GammaMixture":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class EmConfig:
    L: int = 3
    restarts: int = 5
    tol: float = 1e-8
    tol_floor: float = 1e-16
    max_iters: int = 500
    seed: int = 0
    perturbation: float = 0.3

    def __post_init__(self):
        if self.L < 1 or self.restarts < 1 or not self.tol > 0 or self.max_iters < 1:
            raise ValueError(f"invalid EM configuration {self}")


@dataclass(frozen=True, eq=False)
class EmFitResult:
    mixture: GammaMixture
    final_log_likelihood: float
    iterations: int
    ll_trace: list
    converged: bool = True
    restart_traces: list = field(default_factory=list, repr=False)


def gamma_logpdf(x, alpha: float, beta: float):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return (alpha - 1.0) * np.log(x) - x / beta - ln_gamma(alpha) - alpha * math.log(beta)


def gamma_pdf(rho, params: GammaParams):
    """Gamma density at ``rho`` (scalar or array, all >= 0).

    At rho = 0 the density is 0 for alpha > 1 and 1/beta for alpha = 1;
    for alpha < 1 it diverges and a ``ValueError`` is raised.
    """
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0):
        raise ValueError("Gamma density is defined for rho >= 0")
    a, b = params.alpha, params.beta
    if np.any(r == 0) and a < 1:
        raise ValueError("Gamma density diverges at 0 for alpha < 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(gamma_logpdf(r, a, b))
    if a == 1:
        out = np.where(r == 0, 1.0 / b, out)
    else:
        out = np.where(r == 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def gamma_sample(params: GammaParams, n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return stream(seed, 11).gamma(params.alpha, params.beta, size=int(n))


def squared_distance(rho_i, rho_j, dphi):
    """|rho_i e^{j phi_i} - rho_j e^{j phi_j}|^2 given the phase gap."""
    rho_i = np.asarray(rho_i, dtype=float)
    rho_j = np.asarray(rho_j, dtype=float)
    d = rho_i ** 2 + rho_j ** 2 - 2.0 * rho_i * rho_j * np.cos(dphi)
    return np.maximum(d, 0.0)


def squared_distance_samples(params: GammaParams, n: int, seed: int) -> np.ndarray:
    """Draw the squared distance D between two independent random symbols."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream(seed, 12)
    rho = rng.gamma(params.alpha, params.beta, size=(2, int(n)))
    dphi = rng.uniform(0.0, 2.0 * np.pi, size=int(n))
    return squared_distance(rho[0], rho[1], dphi)


def _component_logpdf(x, logx, mix: GammaMixture):
    # (N, L) matrix of log w_l + log f(x; alpha_l, beta_l)
    a, b, w = mix.alphas, mix.betas, mix.weights
    const = np.array([math.log(wi) if wi > 0 else -np.inf for wi in w])
    const -= np.array([ln_gamma(ai) for ai in a]) + a * np.log(b)
    return logx[:, None] * (a - 1.0)[None, :] - x[:, None] / b[None, :] + const[None, :]


def mixture_pdf(d, mix: GammaMixture):
    x = np.atleast_1d(np.asarray(d, dtype=float))
    if np.any(x <= 0):
        raise ValueError("mixture density is evaluated for d > 0")
    lp = _component_logpdf(x, np.log(x), mix)
    out = np.exp(lp).sum(axis=1)
    return float(out[0]) if np.ndim(d) == 0 else out


def mixture_cdf(d, mix: GammaMixture):
    x = np.asarray(d, dtype=float)
    out = np.zeros(np.shape(x))
    for w, a, b in zip(mix.weights, mix.alphas, mix.betas):
        out = out + w * gammainc(a, np.maximum(x, 0.0) / b)
    return out


def mixture_mgf(s: float, mix: GammaMixture) -> float:
    """M_D(s) = sum_l w_l (1 - beta_l s)^(-alpha_l), for s < min 1/beta_l."""
    if np.any(mix.betas * s >= 1.0):
        raise ValueError(f"MGF diverges at s={s} (needs s < min 1/beta)")
    if s == 0:
        return 1.0
    return float(np.sum(mix.weights * np.exp(-mix.alphas * np.log1p(-mix.betas * s))))


def mixture_sample(mix: GammaMixture, n: int, seed: int) -> np.ndarray:
    rng = stream(seed, 13)
    comp = rng.choice(mix.L, size=int(n), p=mix.weights)
    return rng.gamma(mix.alphas[comp], mix.betas[comp])


def _logsumexp_rows(lp):
    m = lp.max(axis=1)
    return m + np.log(np.exp(lp - m[:, None]).sum(axis=1))


def log_likelihood(samples, mix: GammaMixture) -> float:
    x = np.asarray(samples, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log-likelihood needs strictly positive samples")
    return float(np.sum(_logsumexp_rows(_component_logpdf(x, np.log(x), mix))))


def minka_shape(s: float) -> float:
    return (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)


def solve_shape(s: float, max_newton: int = 50) -> float:
    """Root of ln(a) - digamma(a) = s for s > 0.

    Newton's method from Minka's closed-form start; bisection on
    [1e-6, 1e6] if Newton stalls.
    """
    if not s > 0:
        raise ValueError(f"shape statistic must be positive, got {s}")
    a = minka_shape(s)
    for _ in range(max_newton):
        f = log_minus_digamma(a) - s
        if abs(f) <= 1e-14 * max(s, 1e-300) or abs(f) < 1e-15:
            return a
        step = f / (1.0 / a - trigamma(a))
        new = a - step
        if new <= 0:
            new = a / 2.0
        if abs(new - a) <= 1e-15 * a:
            return new
        a = new
    lo, hi = 1e-6, 1e6
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if log_minus_digamma(mid) > s:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1.0 < 1e-15:
            break
    return math.sqrt(lo * hi)


def _quantile_init(xs_sorted, L):
    alphas, betas = [], []
    for group in np.array_split(xs_sorted, L):
        mu = float(np.mean(group))
        var = float(np.var(group))
        if var <= 0.0 or not np.isfinite(var):
            alphas.append(1.0)
            betas.append(max(mu, 1e-300))
        else:
            alphas.append(mu * mu / var)
            betas.append(var / mu)
    return np.array(alphas), np.array(betas)


_WEIGHT_FLOOR = 1e-8


@numba.njit(cache=True, fastmath=True)
def _em_stats(x, logx, am1, invb, const, nk, sx, slx):
    # one fused pass: log-likelihood plus responsibility-weighted sums
    n = x.shape[0]
    L = am1.shape[0]
    lp = np.empty(L)
    ll = 0.0
    for l in range(L):
        nk[l] = 0.0
        sx[l] = 0.0
        slx[l] = 0.0
    for i in range(n):
        xi = x[i]
        lxi = logx[i]
        m = -np.inf
        for l in range(L):
            v = am1[l] * lxi - xi * invb[l] + const[l]
            lp[l] = v
            if v > m:
                m = v
        tot = 0.0
        for l in range(L):
            e = math.exp(lp[l] - m)
            lp[l] = e
            tot += e
        ll += m + math.log(tot)
        inv = 1.0 / tot
        for l in range(L):
            r = lp[l] * inv
            nk[l] += r
            sx[l] += r * xi
            slx[l] += r * lxi
    return ll


def _stats(x, logx, mix: GammaMixture):
    L = mix.L
    const = np.log(mix.weights) - np.array([ln_gamma(a) for a in mix.alphas]) - mix.alphas * np.log(mix.betas)
    nk, sx, slx = np.zeros(L), np.zeros(L), np.zeros(L)
    ll = _em_stats(x, logx, mix.alphas - 1.0, 1.0 / mix.betas, const, nk, sx, slx)
    return ll, nk, sx, slx


def _run_em(x, logx, w, a, b, cfg: EmConfig):
    n = len(x)
    trace = []
    mix = GammaMixture(w, a, b)
    converged = False
    for it in range(cfg.max_iters + 1):
        ll, nk, sx, slx = _stats(x, logx, mix)
        if not np.isfinite(ll):
            raise FloatingPointError("non-finite log-likelihood")
        trace.append(ll)
        if len(trace) > 1:
            prev = trace[-2]
            if (ll - prev) / (abs(prev) + cfg.tol_floor) < cfg.tol:
                converged = True
                break
        if it == cfg.max_iters:
            break
        safe = np.maximum(nk, 1e-300)
        dbar = sx / safe
        lnbar = slx / safe
        new_a = mix.alphas.copy()
        new_b = mix.betas.copy()
        new_w = nk / n
        for l in range(mix.L):
            if nk[l] < _WEIGHT_FLOOR * n:
                new_w[l] = _WEIGHT_FLOOR
                continue
            s = math.log(dbar[l]) - lnbar[l]
            new_a[l] = solve_shape(max(s, 1e-12))
            new_b[l] = dbar[l] / new_a[l]
        mix = GammaMixture(new_w / new_w.sum(), new_a, new_b)
    return mix, trace, converged


def fit_gamma_mixture_em(samples, config: EmConfig = EmConfig()) -> EmFitResult:
    """Fit an L-component Gamma mixture by EM with R restarts.

    Restart 0 uses the quantile moment-matching start; restart r >= 1
    multiplies every initial shape and scale by exp(u), u ~ U[-0.3, 0.3],
    drawn from a restart-specific stream. The restart with the highest
    final log-likelihood wins.
    """
    x = np.asarray(samples, dtype=float)
    if len(x) < 10 * config.L:
        raise ValueError(f"need at least {10 * config.L} samples for L={config.L}")
    if np.any(x <= 0):
        raise ValueError("EM needs strictly positive samples")
    logx = np.log(x)
    a0, b0 = _quantile_init(np.sort(x), config.L)
    w0 = np.full(config.L, 1.0 / config.L)

    best = None
    traces = []
    failures = 0
    for r in range(config.restarts):
        a, b = a0.copy(), b0.copy()
        if r > 0:
            rng = stream(config.seed, 21, r)
            u = rng.uniform(-config.perturbation, config.perturbation, size=(2, config.L))
            a = a * np.exp(u[0])
            b = b * np.exp(u[1])
        try:
            mix, trace, conv = _run_em(x, logx, w0, a, b, config)
        except (FloatingPointError, ValueError, ArithmeticError):
            failures += 1
            traces.append([])
            continue
        traces.append(trace)
        if best is None or trace[-1] > best[1][-1]:
            best = (mix, trace, conv)
    if best is None:
        raise EmFailure(f"all {failures} EM restarts failed")
    mix, trace, conv = best
    return EmFitResult(mix, trace[-1], len(trace) - 1, trace, conv, traces)


def method_of_moments_single(design: GammaParams) -> GammaParams:
    """Single-Gamma moment match of D for Gamma(alpha, beta) amplitudes."""
    a, b = design.alpha, design.beta
    shape = 2.0 * a * (a + 1.0) / ((a + 2.0) * (a + 3.0))
    scale = (a + 2.0) * (a + 3.0) * b * b
    return GammaParams(shape, scale)


def kl_divergence_empirical(samples, mix: GammaMixture, bins: int = 200) -> float:
    """KL(empirical || mixture) over equal-probability bins of the samples.

    Bin masses of the mixture come from its CDF, so the first and last
    bins extend to 0 and infinity.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    if len(x) < 1000:
        raise ValueError("need at least 1000 samples")
    if bins < 10:
        raise ValueError("need at least 10 bins")
    edges = np.quantile(x, np.linspace(0.0, 1.0, bins + 1))
    inner = edges[1:-1]
    counts = np.diff(np.concatenate([[0], np.searchsorted(x, inner, side="right"), [len(x)]]))
    p = counts / len(x)
    cdf = np.concatenate([[0.0], mixture_cdf(inner, mix), [1.0]])
    q = np.diff(cdf)
    if np.any(q < 1e-300):
        warnings.warn("mixture mass below 1e-300 in some bins; clamped", RuntimeWarning)
        q = np.maximum(q, 1e-300)
    keep = p > 0
    return float(np.sum(p[keep] * np.log(p[keep] / q[keep])))
