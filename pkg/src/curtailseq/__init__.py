"""Exact sequential single-arm trial design with curtailed futility stopping."""

from .comparators import (
    FixedDesign,
    SimonDesign,
    agresti_coull_z,
    fixed_exact_design,
    score_sample_size,
    simon_characteristics,
    simon_search,
    wald_sample_size,
)
from .design import (
    Design,
    DesignSearch,
    DesignSearchError,
    Hypotheses,
    OperatingCharacteristics,
    StageDecision,
    classify_state,
    futility_boundaries,
    nb_pmf,
    operating_characteristics,
    search_design,
)
from .distribution import (
    SamplingDistribution,
    StopKind,
    TerminalOutcome,
    brute_force_oracle,
    build_distribution,
    exact_power,
    expectation,
    expected_sample_size,
    stagewise_compare,
    terminal_pmf,
)
from .estimation import (
    AdjustMode,
    EstimateReport,
    Ordering,
    bias_adjusted_estimate,
    bias_function,
    estimate_report,
    mue,
    naive_estimate,
    pvalue_P,
    pvalue_Q,
)
from .intervals import (
    METHODS,
    ConfidenceInterval,
    cp_interval,
    dufsat_interval,
    exact_coverage,
    interval_for,
    jt_interval,
    midp_cp_interval,
    midp_jt_interval,
    support_intervals,
)
from .simulation import (
    PerformanceRow,
    ScenarioGrid,
    compare_designs,
    emit_results,
    evaluate_estimation,
    evaluate_oc,
    simulate_trial,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustMode",
    "ConfidenceInterval",
    "Design",
    "DesignSearch",
    "DesignSearchError",
    "EstimateReport",
    "FixedDesign",
    "Hypotheses",
    "METHODS",
    "OperatingCharacteristics",
    "Ordering",
    "PerformanceRow",
    "SamplingDistribution",
    "ScenarioGrid",
    "SimonDesign",
    "StageDecision",
    "StopKind",
    "TerminalOutcome",
    "agresti_coull_z",
    "bias_adjusted_estimate",
    "bias_function",
    "brute_force_oracle",
    "build_distribution",
    "classify_state",
    "compare_designs",
    "cp_interval",
    "dufsat_interval",
    "emit_results",
    "estimate_report",
    "evaluate_estimation",
    "evaluate_oc",
    "exact_coverage",
    "exact_power",
    "expectation",
    "expected_sample_size",
    "fixed_exact_design",
    "futility_boundaries",
    "interval_for",
    "jt_interval",
    "midp_cp_interval",
    "midp_jt_interval",
    "mue",
    "naive_estimate",
    "nb_pmf",
    "operating_characteristics",
    "pvalue_P",
    "pvalue_Q",
    "score_sample_size",
    "search_design",
    "simon_characteristics",
    "simon_search",
    "simulate_trial",
    "stagewise_compare",
    "support_intervals",
    "terminal_pmf",
    "wald_sample_size",
]
