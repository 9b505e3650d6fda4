"""Claim frequency, severity, quota-share and VaR/CTE analysis for a motor book."""

__version__ = "0.1.0"

from .core import (
    ClaimEvent,
    EmpiricalSample,
    Gender,
    LossType,
    PolicyHolder,
    Portfolio,
    ValidationError,
    emit_csv,
    event_totals,
    ingest_csv,
    losses_by_type,
)
from .frequency import (
    NcdRegressionModel,
    NegBinParams,
    ResponseKind,
    fit_ncd_regression,
    fit_negbin,
    mean_change_series,
    negbin_pmf,
    predicted_mean_grid,
)
from .pricing import OfferScenario, Recommendation, evaluate_offer
from .reinsurance import QuotaShare, ceded_losses, quota_sweep, retained_losses, retained_moments
from .risk import RiskReport, cte_empirical, economic_capital_gap, risk_table, var_empirical
from .severity import Family, SeverityFit, best_fit, fit_severity, kde_density, tail_loss_probability
from .synthgen import GenConfig, SeveritySpec, default_config, generate_portfolio
