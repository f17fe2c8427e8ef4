"""Markowitz portfolio choice in the log metric.

A portfolio with weights w holds the weighted geometric return
prod_i R_i^w_i, whose log growth rate is w'mu with mu = E[ln R] and whose
squared log distance to its l-mean is the log variance w'Sigma@w with
Sigma = Cov(ln R).  Minimizing that variance subject to sum(w) = 1 and
w'mu = target is an equality-constrained quadratic program solved in
closed form through the Lagrangian linear system; short positions are
allowed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, null_space

from .lmoments import LogMoments, SingularCovarianceError

# Weights must sum to one within this tolerance.
WEIGHT_SUM_TOL = 1e-12

# Relative eigenvalue threshold below which Sigma is treated as singular.
SINGULARITY_RTOL = 1e-10

# Relative spread below which expected log returns count as constant,
# making the two equality constraints linearly dependent.
CONSTANT_MU_RTOL = 1e-12


class DependentConstraintsError(ValueError):
    """Expected log returns are constant: the two constraints are dependent."""


class ReturnsPanel:
    """T periods of strictly positive gross returns for k assets."""

    __slots__ = ("returns", "labels")

    def __init__(self, returns, labels: Sequence[str] | None = None):
        arr = np.asarray(returns, dtype=float)
        if arr.ndim != 2:
            raise ValueError("returns must be a T x k matrix")
        t, k = arr.shape
        if t < 2 or k < 2:
            raise ValueError("need at least 2 periods and 2 assets")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValueError("gross returns must be strictly positive and finite")
        if labels is None:
            labels = tuple(f"asset{i + 1}" for i in range(k))
        else:
            labels = tuple(str(label) for label in labels)
            if len(labels) != k:
                raise ValueError(f"need {k} asset labels, got {len(labels)}")
        arr = arr.copy()
        arr.flags.writeable = False
        self.returns = arr
        self.labels = labels

    @property
    def num_periods(self) -> int:
        return self.returns.shape[0]

    @property
    def num_assets(self) -> int:
        return self.returns.shape[1]


@dataclass(frozen=True)
class PortfolioWeights:
    """Asset weights summing to one; short positions allowed."""

    w: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.w, dtype=float).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("weights must be a nonempty vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("weights must be finite")
        if abs(arr.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1 within {WEIGHT_SUM_TOL:g}")
        arr.flags.writeable = False
        object.__setattr__(self, "w", arr)

    @property
    def dim(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class FrontierPoint:
    """One solved point of the minimum-log-variance frontier."""

    target_mu: float
    weights: PortfolioWeights
    log_variance: float

    def __post_init__(self):
        if self.log_variance < -1e-12:
            raise ValueError("log variance must be nonnegative up to rounding")


def estimate_log_moments(panel: ReturnsPanel) -> LogMoments:
    """Columnwise mean and (T-1)-divisor covariance of the log returns."""
    logs = np.log(panel.returns)
    mean = logs.mean(axis=0)
    cov = np.atleast_2d(np.cov(logs, rowvar=False, ddof=1))
    return LogMoments(mean, 0.5 * (cov + cov.T))


def portfolio_stats(moments: LogMoments, weights: PortfolioWeights) -> tuple[float, float]:
    """(log growth rate, log variance) = (w'mu, w'Sigma w)."""
    if weights.dim != moments.dim:
        raise ValueError(f"dimension mismatch: {weights.dim} weights vs {moments.dim} assets")
    w = weights.w
    return float(w @ moments.mean_log), float(w @ moments.cov_log @ w)


def weighted_geometric_return(r, weights: PortfolioWeights) -> float:
    """Weighted geometric return prod_i r[i]^w_i, evaluated in log space."""
    values = np.asarray(getattr(r, "values", r), dtype=float)
    if values.shape != (weights.dim,):
        raise ValueError("return vector and weights must share dimension")
    return float(np.exp(weights.w @ np.log(values)))


def _check_solvable(moments: LogMoments) -> None:
    eigenvalues = np.linalg.eigvalsh(moments.cov_log)
    largest = eigenvalues[-1]
    if largest <= 0.0 or eigenvalues[0] <= SINGULARITY_RTOL * largest:
        raise SingularCovarianceError(
            f"log-covariance is numerically singular: eigenvalue {eigenvalues[0]:.6e} "
            f"against largest {largest:.6e}"
        )
    mu = moments.mean_log
    if np.ptp(mu) <= CONSTANT_MU_RTOL * max(1.0, np.max(np.abs(mu))):
        raise DependentConstraintsError(
            "expected log returns are constant across assets; the target constraint "
            "is dependent on the budget constraint"
        )


def min_lvar_portfolio(moments: LogMoments, target_mu: float) -> PortfolioWeights:
    """Minimize w'Sigma w subject to sum(w) = 1 and w'mu = target_mu.

    Solves the Lagrangian system w = Sigma^-1 A' (A Sigma^-1 A')^-1 b with
    A = [1'; mu'] and b = (1, target_mu) through a Cholesky factorization
    of Sigma; no explicit inverse is formed.
    """
    _check_solvable(moments)
    constraints = np.column_stack([np.ones(moments.dim), moments.mean_log])
    factor = cho_factor(moments.cov_log)
    solved = cho_solve(factor, constraints)
    gram = constraints.T @ solved
    multipliers = np.linalg.solve(gram, np.array([1.0, float(target_mu)]))
    return PortfolioWeights(solved @ multipliers)


def kkt_residual(moments: LogMoments, weights: PortfolioWeights, target_mu: float) -> float:
    """Max-norm stationarity defect of a candidate solution.

    Recovers the multipliers by least squares from Sigma w = A' lambda and
    returns max |Sigma w - A' lambda|; near zero certifies optimality on
    the feasible affine subspace.
    """
    constraints = np.column_stack([np.ones(moments.dim), moments.mean_log])
    gradient = moments.cov_log @ weights.w
    multipliers, *_ = np.linalg.lstsq(constraints, gradient, rcond=None)
    return float(np.max(np.abs(gradient - constraints @ multipliers)))


def efficient_frontier(moments: LogMoments, targets: Sequence[float]) -> list[FrontierPoint]:
    """Solve the minimum-log-variance problem for every target, sorted by target."""
    points = []
    for target in sorted(float(t) for t in targets):
        weights = min_lvar_portfolio(moments, target)
        _, variance = portfolio_stats(moments, weights)
        points.append(FrontierPoint(target_mu=target, weights=weights, log_variance=variance))
    return points


def markowitz_equivalence_check(panel: ReturnsPanel, target_mu: float) -> float:
    """Max weight deviation between the geodesic objective and the log QP.

    The geodesic route minimizes the sample variance of the portfolio
    log-return series directly on the (centered) data matrix by least
    squares over the feasible affine subspace; the QP route solves the
    Lagrangian system on the estimated covariance.  The two objectives are
    algebraically identical, so the deviation is pure rounding.
    """
    moments = estimate_log_moments(panel)
    _check_solvable(moments)

    logs = np.log(panel.returns)
    centered = logs - logs.mean(axis=0)
    constraints = np.vstack([np.ones(panel.num_assets), moments.mean_log])
    rhs = np.array([1.0, float(target_mu)])
    particular, *_ = np.linalg.lstsq(constraints, rhs, rcond=None)
    basis = null_space(constraints)
    if basis.shape[1] == 0:
        geodesic_weights = particular
    else:
        reduced, *_ = np.linalg.lstsq(centered @ basis, -centered @ particular, rcond=None)
        geodesic_weights = particular + basis @ reduced

    qp_weights = min_lvar_portfolio(moments, target_mu).w
    return float(np.max(np.abs(geodesic_weights - qp_weights)))
