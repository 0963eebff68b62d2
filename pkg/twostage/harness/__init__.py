"""Sweeps, robustness runs and CSV output behind the command-line interface."""

from __future__ import annotations

from .sweeps import (
    RobustnessRow,
    RobustnessSpec,
    SweepRow,
    SweepSpec,
    iter_sweep_rows,
    parse_range,
    robustness_rows,
    run_robustness,
    run_sweep,
    sweep_rows,
    theory_row_total,
    write_csv_atomic,
)

__all__ = [
    "RobustnessRow",
    "RobustnessSpec",
    "SweepRow",
    "SweepSpec",
    "iter_sweep_rows",
    "parse_range",
    "robustness_rows",
    "run_robustness",
    "run_sweep",
    "sweep_rows",
    "theory_row_total",
    "write_csv_atomic",
]
