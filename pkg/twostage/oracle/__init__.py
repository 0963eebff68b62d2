"""Exhaustive-enumeration ground truth for tiny instances."""

from __future__ import annotations

from .enumeration import (
    DEFAULT_BUDGET,
    EnumerationResult,
    OracleComparison,
    compare_with_analytic,
    design_space_size,
    enumerate_expected_tests,
)

__all__ = [
    "DEFAULT_BUDGET",
    "EnumerationResult",
    "OracleComparison",
    "compare_with_analytic",
    "design_space_size",
    "enumerate_expected_tests",
]
