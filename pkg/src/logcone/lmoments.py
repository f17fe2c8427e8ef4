"""Logarithmic moments of positive random variables with discrete laws.

A :class:`Sample` is a weighted collection of positive observations and
doubles as a random variable on a finite probability space.  The l-mean
exp(E[ln X]) minimizes the expected squared log distance, the l-covariance
is the covariance of logarithms, and the best predictor of Y of the form
a*X^b in the log metric is ordinary least squares on logarithms, mapped
back through exp.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cone_geometry import PositiveDomainError, PositiveVector

# Weights must sum to one within this absolute tolerance.
WEIGHT_TOL = 1e-12

# Relative eigenvalue threshold below which a log-covariance is treated as
# singular (beyond double-precision trustworthiness).
SINGULARITY_RTOL = 1e-10

# Smallest Var(ln X) admitting a unique power-law exponent.
MIN_REGRESSOR_VARIANCE = 1e-12


class SampleAlignmentError(ValueError):
    """Two samples do not share outcomes (different K or weights)."""


class SingularCovarianceError(ValueError):
    """A log-covariance matrix is singular or nearly so."""


class DegenerateRegressorError(ValueError):
    """Var(ln X) is too small for a unique power-law exponent."""


class Sample:
    """K weighted observations of an n-dimensional strictly positive variable.

    Weights are nonnegative and sum to one; they default to uniform 1/K.
    The componentwise logarithms are taken once at construction and exposed
    as ``log_data``.
    """

    __slots__ = ("data", "weights", "log_data")

    def __init__(self, data, weights=None):
        arr = np.asarray(data, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("sample data must be a K x n array with K, n >= 1")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise PositiveDomainError("sample entries must be strictly positive and finite")
        arr = arr.copy()
        k = arr.shape[0]
        if weights is None:
            w = np.full(k, 1.0 / k)
        else:
            w = np.asarray(weights, dtype=float).copy()
            if w.shape != (k,):
                raise ValueError(f"weights must have shape ({k},)")
            if not np.all(np.isfinite(w)) or np.any(w < 0.0):
                raise ValueError("weights must be finite and nonnegative")
            if abs(w.sum() - 1.0) > WEIGHT_TOL:
                raise ValueError(f"weights must sum to 1 within {WEIGHT_TOL:g}, got {w.sum()!r}")
        arr.flags.writeable = False
        w.flags.writeable = False
        self.data = arr
        self.weights = w
        log = np.log(arr)
        log.flags.writeable = False
        self.log_data = log

    @property
    def num_observations(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def is_uniform(self) -> bool:
        return bool(np.max(np.abs(self.weights - 1.0 / self.num_observations)) <= WEIGHT_TOL)

    def row(self, k: int) -> PositiveVector:
        return PositiveVector(self.data[k])

    def __repr__(self) -> str:
        return f"Sample(K={self.num_observations}, n={self.dim})"


@dataclass(frozen=True)
class LogMoments:
    """Pair (E[ln X], Cov(ln X)) driving prediction and portfolio choice."""

    mean_log: np.ndarray
    cov_log: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean_log, dtype=float).copy()
        cov = np.asarray(self.cov_log, dtype=float).copy()
        if mean.ndim != 1:
            raise ValueError("mean_log must be a vector")
        if cov.shape != (mean.size, mean.size):
            raise ValueError("cov_log must be square and match mean_log")
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-12:
            raise ValueError("cov_log must be symmetric within 1e-12")
        eigenvalues = np.linalg.eigvalsh(cov)
        if eigenvalues.size and eigenvalues[0] < -1e-10:
            raise ValueError(f"cov_log must be positive semidefinite, eigenvalue {eigenvalues[0]!r}")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean_log", mean)
        object.__setattr__(self, "cov_log", cov)

    @property
    def dim(self) -> int:
        return self.mean_log.size


@dataclass(frozen=True)
class PowerLawFit:
    """Best predictor Y# = a * X^b in the log metric, with diagnostics.

    d_denominator is D = Var(ln X); residual_lvar is the weighted mean square
    of ln Y - ln Y#; predictor_log_variance is Var(ln Y#) = b^2 * D and
    m_ell_predictor is the l-mean of Y#, equal to the l-mean of Y.
    """

    a: float
    b: float
    d_denominator: float
    residual_lvar: float
    m_ell_predictor: float = field(default=0.0)
    predictor_log_variance: float = field(default=0.0)

    def __post_init__(self):
        if not (self.a > 0.0):
            raise ValueError("scale a must be positive")
        if not (self.d_denominator > 0.0):
            raise ValueError("D = Var(ln X) must be positive")
        if self.residual_lvar < 0.0:
            raise ValueError("residual log-variance must be nonnegative")


def _check_alignment(sx: Sample, sy: Sample) -> None:
    if sx.num_observations != sy.num_observations:
        raise SampleAlignmentError(
            f"samples must share K: {sx.num_observations} vs {sy.num_observations}"
        )
    if np.max(np.abs(sx.weights - sy.weights)) > WEIGHT_TOL:
        raise SampleAlignmentError("samples must share the same outcome weights")


def l_mean(s: Sample) -> PositiveVector:
    """exp(E[ln X]): the point minimizing the expected squared log distance."""
    return PositiveVector(np.exp(s.weights @ s.log_data))


def l_mean_jensen_gap(s: Sample) -> np.ndarray:
    """E[X] - l_mean(X) componentwise; nonnegative by Jensen's inequality."""
    return s.weights @ s.data - l_mean(s).values


def log_moments(s: Sample) -> LogMoments:
    """Population log-moments of a sample: mean and weighted covariance of logs."""
    mean = s.weights @ s.log_data
    centered = s.log_data - mean
    cov = centered.T @ (s.weights[:, None] * centered)
    return LogMoments(mean, 0.5 * (cov + cov.T))


def l_covariance(sx: Sample, sy: Sample) -> np.ndarray:
    """Cov(ln X, ln Y) under the shared discrete law of two aligned samples."""
    _check_alignment(sx, sy)
    cx = sx.log_data - sx.weights @ sx.log_data
    cy = sy.log_data - sy.weights @ sy.log_data
    return cx.T @ (sx.weights[:, None] * cy)


def empirical_l_variance(s: Sample) -> np.ndarray:
    """Unbiased estimator of Var(ln X): divisor K-1, deviations from ln of the
    empirical l-mean.  Defined for uniform weights (i.i.d. draws) only."""
    if s.num_observations < 2:
        raise ValueError("the empirical log-variance needs K >= 2 observations")
    if not s.is_uniform():
        raise ValueError("the empirical log-variance is defined for uniform weights")
    deviations = s.log_data - s.log_data.mean(axis=0)
    return (deviations * deviations).sum(axis=0) / (s.num_observations - 1)


def center(s: Sample) -> Sample:
    """Whitened sample exp(Sigma^-1/2 (ln X - E[ln X])).

    Uses the symmetric (spectral) inverse square root, so the result has
    l-mean one and identity log-covariance, and re-centering is the identity
    up to rounding.  Raises :class:`SingularCovarianceError` when the
    smallest eigenvalue of the log-covariance falls below SINGULARITY_RTOL
    times the largest.
    """
    moments = log_moments(s)
    eigenvalues, vectors = np.linalg.eigh(moments.cov_log)
    largest = eigenvalues[-1]
    if largest <= 0.0 or eigenvalues[0] <= SINGULARITY_RTOL * largest:
        raise SingularCovarianceError(
            f"log-covariance is numerically singular: eigenvalue {eigenvalues[0]:.6e} "
            f"against largest {largest:.6e}"
        )
    inv_sqrt = (vectors / np.sqrt(eigenvalues)) @ vectors.T
    new_logs = (s.log_data - moments.mean_log) @ inv_sqrt
    return Sample(np.exp(new_logs), s.weights)


def fit_power_law(x: Sample, y: Sample) -> PowerLawFit:
    """Fit Y# = a * X^b minimizing the log distance to Y (scalar samples).

    Closed form: b = Cov(ln X, ln Y) / Var(ln X) and
    a = exp(E[ln Y] - b E[ln X]); identical to least squares of ln Y on ln X.
    """
    if x.dim != 1 or y.dim != 1:
        raise ValueError("power-law fitting takes scalar (n=1) samples")
    _check_alignment(x, y)
    w = x.weights
    lx = x.log_data[:, 0]
    ly = y.log_data[:, 0]
    mx = float(w @ lx)
    my = float(w @ ly)
    d = float(w @ ((lx - mx) * (lx - mx)))
    if d <= MIN_REGRESSOR_VARIANCE:
        raise DegenerateRegressorError(
            f"Var(ln X) = {d:.3e} is too small for a unique exponent"
        )
    b = float(w @ ((lx - mx) * (ly - my))) / d
    ln_a = my - b * mx
    residuals = ly - (ln_a + b * lx)
    return PowerLawFit(
        a=float(np.exp(ln_a)),
        b=b,
        d_denominator=d,
        residual_lvar=float(w @ (residuals * residuals)),
        m_ell_predictor=float(np.exp(my)),
        predictor_log_variance=b * b * d,
    )


def predict_power_law(fit: PowerLawFit, x: PositiveVector) -> PositiveVector:
    """Apply the fitted predictor: componentwise a * x^b."""
    return PositiveVector(fit.a * x.values**fit.b)
