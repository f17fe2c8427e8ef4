"""Geometry of the open cone of strictly positive vectors.

The cone M = (0, inf)^n carries an invariant Riemannian metric under which
the geodesic distance between two points is the Euclidean distance between
their componentwise logarithms,

    d(x1, x2)^2 = sum_i (ln x1[i] - ln x2[i])^2.

Geodesics are componentwise log-linear curves, the exponential map is the
componentwise exponential, and the multiplicative group acts on M by
isometries.  The minimizer of the sum of squared distances to a finite set
of points is their componentwise geometric mean.  Everything in this module
is a pure function over immutable values.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

# Componentwise bounds keeping ln/exp comfortably inside double range.
MIN_COMPONENT = 1e-300
MAX_COMPONENT = 1e300

# Relative tolerance for "equal up to rounding" comparisons of cone points.
EQUALITY_RTOL = 1e-12

# Default finite-difference step for the geodesic ODE residual; balances
# O(h^2) truncation against O(eps/h^2) cancellation for doubles.
DEFAULT_RESIDUAL_STEP = 1e-4


class DimensionMismatchError(ValueError):
    """Operands live in cones or tangent spaces of different dimension."""


class PositiveDomainError(ValueError):
    """A component is outside the admissible strictly positive range."""


def _as_vector(values, kind: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise PositiveDomainError(f"a {kind} must be a flat sequence of numbers")
    if arr.size == 0:
        raise PositiveDomainError(f"a {kind} needs at least one component")
    return arr.copy()


class PositiveVector:
    """A point of the cone (0, inf)^n, validated on construction."""

    __slots__ = ("values",)

    def __init__(self, values: Sequence[float] | np.ndarray):
        arr = _as_vector(values, "cone point")
        if not np.all(np.isfinite(arr)):
            raise PositiveDomainError("cone point components must be finite")
        if np.any(arr < MIN_COMPONENT) or np.any(arr > MAX_COMPONENT):
            raise PositiveDomainError(
                f"cone point components must lie in [{MIN_COMPONENT:g}, {MAX_COMPONENT:g}]"
            )
        arr.flags.writeable = False
        self.values = arr

    @property
    def dim(self) -> int:
        return self.values.size

    def log(self) -> np.ndarray:
        """Componentwise natural logarithm (the chart mapping M to R^n)."""
        return np.log(self.values)

    def approx_equal(self, other: "PositiveVector", rtol: float = EQUALITY_RTOL) -> bool:
        """Componentwise relative comparison; the working notion of equality."""
        if self.dim != other.dim:
            return False
        return bool(np.all(np.abs(self.values - other.values) <= rtol * np.abs(other.values)))

    def __repr__(self) -> str:
        return f"PositiveVector({self.values.tolist()!r})"


class TangentVector:
    """An element of the tangent space R^n at a cone point."""

    __slots__ = ("values",)

    def __init__(self, values: Sequence[float] | np.ndarray):
        arr = _as_vector(values, "tangent vector")
        if not np.all(np.isfinite(arr)):
            raise PositiveDomainError("tangent vector components must be finite")
        arr.flags.writeable = False
        self.values = arr

    @property
    def dim(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"TangentVector({self.values.tolist()!r})"


def _check_same_dim(a, b) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")


def log_distance(x1: PositiveVector, x2: PositiveVector) -> float:
    """Geodesic distance sqrt(sum_i (ln x1[i] - ln x2[i])^2)."""
    _check_same_dim(x1, x2)
    diff = x1.log() - x2.log()
    return float(np.sqrt(diff @ diff))


def geodesic(x1: PositiveVector, x2: PositiveVector, t: float) -> PositiveVector:
    """Point at parameter t on the geodesic from x1 (t=0) to x2 (t=1).

    Componentwise x1 * exp(t * ln(x2/x1)) = x2^t * x1^(1-t).  Values of t
    outside [0, 1] extrapolate along the same curve.
    """
    _check_same_dim(x1, x2)
    return PositiveVector(x1.values * np.exp(t * (x2.log() - x1.log())))


def geodesic_residual(
    x1: PositiveVector,
    x2: PositiveVector,
    t: float,
    h: float = DEFAULT_RESIDUAL_STEP,
) -> np.ndarray:
    """Central-difference residual of the geodesic ODE xdd = xd^2 / x.

    Evaluates the curve of :func:`geodesic` at t-h, t, t+h and returns the
    componentwise defect of the second-order equation; for the exact
    geodesic this is O(h^2).
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    if not (0.0 < t - h and t + h < 1.0):
        raise ValueError(f"t={t} too close to 0 or 1 for step h={h}")
    p_minus = geodesic(x1, x2, t - h).values
    p_mid = geodesic(x1, x2, t).values
    p_plus = geodesic(x1, x2, t + h).values
    second = (p_plus - 2.0 * p_mid + p_minus) / (h * h)
    first = (p_plus - p_minus) / (2.0 * h)
    return second - first * first / p_mid


def exp_map(x: PositiveVector, xi: TangentVector, t: float = 1.0) -> PositiveVector:
    """Riemannian exponential: componentwise x * exp(t * xi)."""
    _check_same_dim(x, xi)
    return PositiveVector(x.values * np.exp(t * xi.values))


def group_action(g: PositiveVector, x: PositiveVector) -> PositiveVector:
    """Action tau_g(x) = g^-1 x g^-1 of the multiplicative group; an isometry.

    The action depends on g only through g^2, so group elements are
    represented by positive vectors without loss of generality.
    """
    _check_same_dim(g, x)
    return PositiveVector(x.values / (g.values * g.values))


def geometric_mean(points: Iterable[PositiveVector]) -> PositiveVector:
    """Componentwise geometric mean; minimizes the sum of squared distances."""
    pts = list(points)
    if not pts:
        raise ValueError("geometric_mean needs at least one point")
    dim = pts[0].dim
    for p in pts[1:]:
        if p.dim != dim:
            raise DimensionMismatchError(f"dimension mismatch: {dim} vs {p.dim}")
    logs = np.stack([p.log() for p in pts])
    return PositiveVector(np.exp(logs.mean(axis=0)))


def semi_parallelogram_check(
    x1: PositiveVector, x2: PositiveVector, y: PositiveVector
) -> tuple[PositiveVector, float]:
    """Midpoint z = sqrt(x1*x2) and the semi-parallelogram slack at y.

    slack = 2 d(y,x1)^2 + 2 d(y,x2)^2 - d(x1,x2)^2 - 4 d(z,y)^2, which is
    nonnegative in any Bruhat-Tits space; in this flat commutative cone it
    vanishes up to rounding.
    """
    _check_same_dim(x1, x2)
    _check_same_dim(x1, y)
    z = PositiveVector(np.sqrt(x1.values * x2.values))
    slack = (
        2.0 * log_distance(y, x1) ** 2
        + 2.0 * log_distance(y, x2) ** 2
        - log_distance(x1, x2) ** 2
        - 4.0 * log_distance(z, y) ** 2
    )
    return z, float(slack)


def metric_preservation_check(xi: TangentVector, nu: TangentVector) -> tuple[float, float]:
    """Both sides of the metric-preservation identity for the exponential map.

    lhs is the Euclidean square norm of nu at the identity; rhs is the square
    norm of nu * exp(xi) in the transported scalar product
    (u, v)_x = (x^-1 u, x^-1 v) at the point x = exp(xi).
    """
    _check_same_dim(xi, nu)
    lhs = float(nu.values @ nu.values)
    base = np.exp(xi.values)
    transported = nu.values * base
    scaled = transported / base
    rhs = float(scaled @ scaled)
    return lhs, rhs
