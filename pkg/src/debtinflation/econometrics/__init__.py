"""Estimators for firm panels and return cross-sections."""

from .core import (
    AP_TOL,
    DUMMY_ROW_LIMIT,
    EstimationError,
    RankDeficiencyError,
    RegressionResult,
    absorb,
    cluster_covariance,
    group_codes,
    ols,
    tsls,
    within_fe_ols,
)
from .designs import (
    EventStudyResult,
    debt_inflation_regression,
    did,
    did_iv,
    economic_magnitude,
    event_study,
    firm_log_change,
    long_difference,
)
from .asset_pricing import (
    FamaMacBethResult,
    PortfolioResult,
    binned_means,
    fama_macbeth,
    market_betas,
    portfolio_sort,
)

__all__ = [
    "AP_TOL", "DUMMY_ROW_LIMIT", "EstimationError", "RankDeficiencyError",
    "RegressionResult", "absorb", "cluster_covariance", "group_codes", "ols", "tsls",
    "within_fe_ols", "EventStudyResult", "debt_inflation_regression", "did", "did_iv",
    "economic_magnitude", "event_study", "firm_log_change", "long_difference",
    "FamaMacBethResult", "PortfolioResult", "binned_means", "fama_macbeth",
    "market_betas", "portfolio_sort",
]
