"""Joint versus stand-alone pricing of two insurance lines with offsetting liabilities."""

from .errors import (
    ComputationError,
    DataMismatch,
    DegenerateData,
    DegenerateFactor,
    DomainError,
    DuplicatePeriod,
    InfeasibleDemand,
    JointPricingError,
    MalformedRow,
    NoConvergence,
    NonPositiveLoss,
    NoRealRoots,
    ValidationError,
)
from .pricing_core import (
    BusinessLine,
    CompetitivenessReport,
    LinePair,
    RiskSpec,
    competitiveness_region,
    critical_threshold,
    joint_loading,
    monitoring_interval,
    risk_reduction_gap,
    standalone_loading,
    reference_pair,
)
from .market_model import (
    DemandModel,
    EquilibriumResult,
    MarketSpec,
    PricingDecision,
    Verdict,
    PRESET_REACTION_SCENARIOS,
    decide_by_demand_threshold,
    decide_by_reaction_bands,
    demand,
    demand_critical_threshold,
    eta,
    premium_difference,
    solve_equilibrium,
    sweep_demand_share,
)

from .mortality_sim import (
    LiLeeParams,
    MortalityDataset,
    ProductKind,
    ProductSpec,
    ScenarioSet,
    SimulationSummary,
    calibrate_gamma,
    fit_li_lee,
    present_value,
    simulate_scenarios,
    summarize,
    var_loading_curve,
)
from .empirical_screen import (
    LossSeries,
    ScreenReport,
    detrend,
    ingest_losses,
    kpss_statistic,
    pairwise_screen,
    region_curve,
    render_report,
)

__version__ = "0.1.0"

__all__ = [
    "ComputationError",
    "DataMismatch",
    "DegenerateData",
    "DegenerateFactor",
    "DomainError",
    "DuplicatePeriod",
    "InfeasibleDemand",
    "JointPricingError",
    "MalformedRow",
    "NoConvergence",
    "NonPositiveLoss",
    "NoRealRoots",
    "ValidationError",
    "BusinessLine",
    "CompetitivenessReport",
    "LinePair",
    "RiskSpec",
    "competitiveness_region",
    "critical_threshold",
    "joint_loading",
    "monitoring_interval",
    "risk_reduction_gap",
    "standalone_loading",
    "reference_pair",
    "DemandModel",
    "EquilibriumResult",
    "MarketSpec",
    "PricingDecision",
    "Verdict",
    "PRESET_REACTION_SCENARIOS",
    "decide_by_demand_threshold",
    "decide_by_reaction_bands",
    "demand",
    "demand_critical_threshold",
    "eta",
    "premium_difference",
    "solve_equilibrium",
    "sweep_demand_share",
    "LiLeeParams",
    "MortalityDataset",
    "ProductKind",
    "ProductSpec",
    "ScenarioSet",
    "SimulationSummary",
    "calibrate_gamma",
    "fit_li_lee",
    "present_value",
    "simulate_scenarios",
    "summarize",
    "var_loading_curve",
    "LossSeries",
    "ScreenReport",
    "detrend",
    "ingest_losses",
    "kpss_statistic",
    "pairwise_screen",
    "region_curve",
    "render_report",
    "__version__",
]
