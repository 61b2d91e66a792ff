from .exceptions import (
    AllPathsFailedError,
    ClearnetError,
    ConfigError,
    ContractViolation,
    OutsideHypothesesError,
    OverLendingWarning,
    SamplingError,
    SolverError,
    WeightError,
    ZeroVarianceError,
)
from .finmodel import (
    CaseTag,
    FinanceParams,
    LimitSolution,
    RegimeReport,
    ShockDraw,
    ShockReturns,
    bank_portfolios,
    classify_regime,
    clearing_statistics,
    closed_form_g1,
    closed_form_g2,
    draw_shocks,
    finite_clearing_map,
    limit_aggregates_numeric,
    measures,
    portfolio,
    sample_shocks,
    solve_limit,
    theory_single_group,
)
from .fpcore import (
    ContractionReport,
    FPConfig,
    FPResult,
    contraction_model_a,
    contraction_model_b,
    iterate_fp,
    lln_diagnostic,
    picard,
    solve_limit_system,
)
from .mcharness import (
    GraphKind,
    MCConfig,
    MCReport,
    PathAverage,
    PathStats,
    correlation_defaults_vs_shocks,
    estimate,
    path_averages,
    resolve_graph_params,
    run_path,
)
from .netgraph import (
    EtaMode,
    GraphSample,
    ModelParams,
    RegularityReport,
    WeightModel,
    build_weights,
    edge_frequencies,
    regularity_diagnostic,
    sample_graph,
    sample_regular_graph,
)
from .record import Record, attr

__all__ = [
    "AllPathsFailedError",
    "ClearnetError",
    "ConfigError",
    "ContractViolation",
    "OutsideHypothesesError",
    "OverLendingWarning",
    "SamplingError",
    "SolverError",
    "WeightError",
    "ZeroVarianceError",
    "CaseTag",
    "FinanceParams",
    "LimitSolution",
    "RegimeReport",
    "ShockDraw",
    "ShockReturns",
    "bank_portfolios",
    "classify_regime",
    "clearing_statistics",
    "closed_form_g1",
    "closed_form_g2",
    "draw_shocks",
    "finite_clearing_map",
    "limit_aggregates_numeric",
    "measures",
    "portfolio",
    "sample_shocks",
    "solve_limit",
    "theory_single_group",
    "ContractionReport",
    "FPConfig",
    "FPResult",
    "contraction_model_a",
    "contraction_model_b",
    "iterate_fp",
    "lln_diagnostic",
    "picard",
    "solve_limit_system",
    "GraphKind",
    "MCConfig",
    "MCReport",
    "PathAverage",
    "PathStats",
    "correlation_defaults_vs_shocks",
    "estimate",
    "path_averages",
    "resolve_graph_params",
    "run_path",
    "EtaMode",
    "GraphSample",
    "ModelParams",
    "RegularityReport",
    "WeightModel",
    "build_weights",
    "edge_frequencies",
    "regularity_diagnostic",
    "sample_graph",
    "sample_regular_graph",
    "Record",
    "attr",
]
