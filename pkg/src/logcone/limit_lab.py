"""Seeded Monte Carlo verification of the log-scale limit theorems.

Samples of positive variables are drawn from a small family of
distributions through reproducible PCG64 streams; normals come from a
Box-Muller transform of uniform doubles in (0, 1].  The law of large
numbers is checked through the decay of |ln m_hat - ln m| across a ladder
of sample sizes, and the central limit theorem through a one-sample
Kolmogorov-Smirnov test of the normalized log statistic against its
normal limit.  Every experiment is a pure function of (distribution,
config): identical seeds give bitwise-identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

from .lmoments import Sample, l_mean

# Relative accuracy demanded of the quadrature path of true_log_moments.
QUAD_RTOL = 1e-10

# Asymptotic one-sample KS critical coefficients, valid for n >= 100 values.
KS_COEFFICIENTS = {0.01: 1.628, 0.05: 1.358}

_FAMILIES = ("lognormal", "uniform", "pareto", "point_mass")


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested accuracy."""


class DegenerateDistributionError(ValueError):
    """The distribution has zero logarithmic variance."""


@dataclass(frozen=True)
class PositiveDistribution:
    """A strictly positive law from a fixed, parameterized family."""

    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")

    @classmethod
    def lognormal(cls, mu: float, sigma: float) -> "PositiveDistribution":
        if not sigma > 0.0:
            raise ValueError("sigma must be positive")
        return cls("lognormal", (float(mu), float(sigma)))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "PositiveDistribution":
        if not 0.0 < lo < hi:
            raise ValueError("need 0 < lo < hi")
        return cls("uniform", (float(lo), float(hi)))

    @classmethod
    def pareto(cls, x_min: float, alpha: float) -> "PositiveDistribution":
        if not x_min > 0.0:
            raise ValueError("x_min must be positive")
        if not alpha > 2.0:
            raise ValueError("alpha must exceed 2")
        return cls("pareto", (float(x_min), float(alpha)))

    @classmethod
    def point_mass(cls, c: float) -> "PositiveDistribution":
        if not c > 0.0:
            raise ValueError("c must be positive")
        return cls("point_mass", (float(c),))


@dataclass(frozen=True)
class TrialConfig:
    """Monte Carlo run shape: draws per trial, trial count, master seed."""

    sample_size: int
    num_trials: int
    seed: int

    def __post_init__(self):
        if self.sample_size < 1:
            raise ValueError("sample_size must be >= 1")
        if self.num_trials < 1:
            raise ValueError("num_trials must be >= 1")


@dataclass
class LimitReport:
    """Per-trial statistics plus the error metric of the experiment."""

    kind: str
    statistics: np.ndarray
    m_ell: float
    sigma_ell_sq: float
    abs_log_errors: np.ndarray | None = None
    ladder_sizes: tuple[int, ...] | None = None
    ladder_median_errors: tuple[float, ...] | None = None
    ks_stat: float | None = None

    def __post_init__(self):
        if self.abs_log_errors is not None and np.any(self.abs_log_errors < 0.0):
            raise ValueError("error metrics must be nonnegative")
        if self.ks_stat is not None and self.ks_stat < 0.0:
            raise ValueError("error metrics must be nonnegative")


def stream(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for the sub-stream (seed, *key).

    The master seed is reduced to an unsigned 64-bit word and the remaining
    key words (experiment-internal indices such as ladder rung and trial)
    are fed to the same SeedSequence, so trials are independent and the
    whole scheme is reproducible across platforms.
    """
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in key]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))


def box_muller_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normals via Box-Muller on uniform doubles in (0, 1]."""
    pairs = (size + 1) // 2
    u1 = 1.0 - rng.random(pairs)
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    return np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:size]


def _draw(dist: PositiveDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    if dist.family == "lognormal":
        mu, sigma = dist.params
        return np.exp(mu + sigma * box_muller_normals(rng, size))
    if dist.family == "uniform":
        lo, hi = dist.params
        return lo + (hi - lo) * rng.random(size)
    if dist.family == "pareto":
        x_min, alpha = dist.params
        # 1 - U lies in (0, 1], so the inverse CDF stays finite.
        return x_min * (1.0 - rng.random(size)) ** (-1.0 / alpha)
    c = dist.params[0]
    return np.full(size, c)


def sample(dist: PositiveDistribution, size: int, seed: int) -> Sample:
    """K i.i.d. draws as a uniform-weight Sample; bitwise-reproducible."""
    if size < 1:
        raise ValueError("sample size must be >= 1")
    return Sample(_draw(dist, stream(seed), size))


def _quad_mean(integrand: Callable[[float], float], lo: float, hi: float) -> float:
    value, abserr = quad(integrand, lo, hi, epsabs=0.0, epsrel=QUAD_RTOL / 10.0, limit=200)
    if abserr > max(QUAD_RTOL * abs(value), 1e-13):
        raise QuadratureError(
            f"quadrature error estimate {abserr:.3e} exceeds tolerance for value {value!r}"
        )
    return value


def true_log_moments(dist: PositiveDistribution) -> tuple[float, float]:
    """(m_ell, sigma_ell_sq) = (exp(E[ln X]), Var(ln X)).

    Closed form for the lognormal and point-mass families; adaptive
    quadrature of the density for uniform and Pareto.
    """
    if dist.family == "lognormal":
        mu, sigma = dist.params
        return float(np.exp(mu)), float(sigma * sigma)
    if dist.family == "point_mass":
        return dist.params[0], 0.0
    if dist.family == "uniform":
        lo, hi = dist.params
        density = 1.0 / (hi - lo)
        first = _quad_mean(lambda x: np.log(x) * density, lo, hi)
        second = _quad_mean(lambda x: np.log(x) ** 2 * density, lo, hi)
    else:
        x_min, alpha = dist.params
        def pdf(x):
            return alpha * x_min**alpha * x ** (-alpha - 1.0)
        first = _quad_mean(lambda x: np.log(x) * pdf(x), x_min, np.inf)
        second = _quad_mean(lambda x: np.log(x) ** 2 * pdf(x), x_min, np.inf)
    return float(np.exp(first)), float(second - first * first)


def lln_experiment(
    dist: PositiveDistribution,
    cfg: TrialConfig,
    ladder: Sequence[int] | None = None,
) -> LimitReport:
    """Empirical l-mean convergence report across a ladder of sample sizes.

    Each (rung, trial) pair owns the stream (seed, rung, trial).  The
    statistics and per-trial errors refer to the rung matching
    cfg.sample_size (the first rung when none matches); the ladder defaults
    to (K, 4K, 16K).
    """
    m_ell, sigma_sq = true_log_moments(dist)
    if ladder is None:
        sizes = (cfg.sample_size, 4 * cfg.sample_size, 16 * cfg.sample_size)
    else:
        sizes = tuple(int(k) for k in ladder)
        if not sizes or any(k < 1 for k in sizes):
            raise ValueError("ladder sizes must be positive")
    ln_m = np.log(m_ell)
    base = sizes.index(cfg.sample_size) if cfg.sample_size in sizes else 0
    medians = []
    base_stats = None
    base_errors = None
    for rung, size in enumerate(sizes):
        stats = np.empty(cfg.num_trials)
        for trial in range(cfg.num_trials):
            draws = _draw(dist, stream(cfg.seed, rung, trial), size)
            stats[trial] = l_mean(Sample(draws)).values[0]
        errors = np.abs(np.log(stats) - ln_m)
        medians.append(float(np.median(errors)))
        if rung == base:
            base_stats = stats
            base_errors = errors
    return LimitReport(
        kind="lln",
        statistics=base_stats,
        m_ell=m_ell,
        sigma_ell_sq=sigma_sq,
        abs_log_errors=base_errors,
        ladder_sizes=sizes,
        ladder_median_errors=tuple(medians),
    )


def clt_statistic(s: Sample, m_ell: float) -> float:
    """Normalized log statistic (1/sqrt(K)) * sum_j (ln X_j - ln m_ell).

    This is the logarithm of (prod_j X_j / m_ell)^(1/sqrt(K)); its limit
    law is N(0, sigma_ell_sq).
    """
    if s.dim != 1:
        raise ValueError("the CLT statistic takes scalar samples")
    if not m_ell > 0.0:
        raise ValueError("m_ell must be positive")
    diffs = s.log_data[:, 0] - np.log(m_ell)
    return float(diffs.sum() / np.sqrt(s.num_observations))


def clt_experiment(dist: PositiveDistribution, cfg: TrialConfig) -> LimitReport:
    """KS comparison of the normalized log statistic against N(0, sigma_ell_sq).

    Trial j owns the stream (seed, j).  Requires at least 100 trials (the
    hardcoded critical values are asymptotic) and a nondegenerate law.
    """
    if cfg.num_trials < 100:
        raise ValueError("clt_experiment needs num_trials >= 100")
    m_ell, sigma_sq = true_log_moments(dist)
    if sigma_sq <= 0.0:
        raise DegenerateDistributionError("the distribution has zero logarithmic variance")
    stats = np.empty(cfg.num_trials)
    for trial in range(cfg.num_trials):
        draws = _draw(dist, stream(cfg.seed, trial), cfg.sample_size)
        stats[trial] = clt_statistic(Sample(draws), m_ell)
    sigma = np.sqrt(sigma_sq)
    ks = ks_statistic(stats, lambda v: normal_cdf(v, sigma))
    return LimitReport(
        kind="clt",
        statistics=stats,
        m_ell=m_ell,
        sigma_ell_sq=sigma_sq,
        ks_stat=ks,
    )


def normal_cdf(x: float, sigma: float = 1.0) -> float:
    """CDF of N(0, sigma^2)."""
    return float(ndtr(x / sigma))


def ks_statistic(values: Sequence[float], cdf: Callable[[float], float]) -> float:
    """One-sample Kolmogorov-Smirnov sup distance against a given CDF."""
    xs = np.sort(np.asarray(values, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("ks_statistic needs at least one value")
    fitted = np.array([float(cdf(x)) for x in xs])
    ranks = np.arange(1, n + 1)
    d_plus = np.max(ranks / n - fitted)
    d_minus = np.max(fitted - (ranks - 1) / n)
    return float(max(d_plus, d_minus, 0.0))


def ks_critical_value(num_values: int, level: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value; valid for num_values >= 100."""
    if num_values < 100:
        raise ValueError("asymptotic critical values need at least 100 values")
    try:
        coefficient = KS_COEFFICIENTS[level]
    except KeyError:
        raise ValueError(f"level must be one of {sorted(KS_COEFFICIENTS)}") from None
    return coefficient / np.sqrt(num_values)
