"""Expected-test formulas and design optimization for two-stage pooled screening."""

from __future__ import annotations

from .formulas import (
    ObjectiveCurve,
    avoidance_prob,
    binomial_pool_negative_prob,
    efficiency_ratio,
    expected_total_tests,
    individual_testing_savings,
    objective_curve,
    pool_negative_prob,
    scan_objective,
)
from .models import (
    CONSTANTS,
    AnalyticPrediction,
    Binomial,
    Constants,
    DesignParams,
    FixedK,
    Mode,
    OptimumMode,
    ProblemInstance,
    SchemeKind,
)
from .optimize import (
    asymptotic_log_coefficient,
    closed_form_expected_tests,
    integer_refine,
    misspecification_inflation,
    numeric_optimal_secondary,
    optimal_design,
    optimal_m,
    optimal_secondary,
    refined_design,
)

__all__ = [
    "AnalyticPrediction",
    "Binomial",
    "CONSTANTS",
    "Constants",
    "DesignParams",
    "FixedK",
    "Mode",
    "ObjectiveCurve",
    "OptimumMode",
    "ProblemInstance",
    "SchemeKind",
    "asymptotic_log_coefficient",
    "avoidance_prob",
    "binomial_pool_negative_prob",
    "closed_form_expected_tests",
    "efficiency_ratio",
    "expected_total_tests",
    "individual_testing_savings",
    "integer_refine",
    "misspecification_inflation",
    "numeric_optimal_secondary",
    "objective_curve",
    "optimal_design",
    "optimal_m",
    "optimal_secondary",
    "pool_negative_prob",
    "refined_design",
    "scan_objective",
]
