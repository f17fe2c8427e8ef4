"""Log-metric statistics on the positive cone: geometry, moments,
conditional expectations, limit theorems, martingales and portfolio choice."""

from .cone_geometry import (
    DimensionMismatchError,
    PositiveDomainError,
    PositiveVector,
    TangentVector,
    exp_map,
    geodesic,
    geodesic_residual,
    geometric_mean,
    group_action,
    log_distance,
    metric_preservation_check,
    semi_parallelogram_check,
)
from .discrete_prob import (
    AdaptedProcess,
    FiniteSpace,
    Filtration,
    NotAdaptedError,
    NotSubmartingaleError,
    Partition,
    RandomVariable,
    classify_l_martingale,
    classify_log_martingale,
    classify_ordinary_martingale,
    cond_expectation,
    doob_decompose,
    independence_check,
    l_cond_expectation,
    l_distance,
    multiplicative_check,
    product_space,
    tower_check,
    verify_minimality,
)
from .limit_lab import (
    DegenerateDistributionError,
    LimitReport,
    PositiveDistribution,
    QuadratureError,
    TrialConfig,
    clt_experiment,
    clt_statistic,
    ks_critical_value,
    ks_statistic,
    lln_experiment,
    normal_cdf,
    sample,
    true_log_moments,
)
from .lmoments import (
    DegenerateRegressorError,
    LogMoments,
    PowerLawFit,
    Sample,
    SampleAlignmentError,
    SingularCovarianceError,
    center,
    empirical_l_variance,
    fit_power_law,
    l_covariance,
    l_mean,
    l_mean_jensen_gap,
    log_moments,
    predict_power_law,
)
from .portfolio_opt import (
    DependentConstraintsError,
    FrontierPoint,
    PortfolioWeights,
    ReturnsPanel,
    efficient_frontier,
    estimate_log_moments,
    kkt_residual,
    markowitz_equivalence_check,
    min_lvar_portfolio,
    portfolio_stats,
    weighted_geometric_return,
)

__version__ = "0.1.0"
