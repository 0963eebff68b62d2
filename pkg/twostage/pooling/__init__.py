"""Sampling of randomized first-stage pool memberships."""

from __future__ import annotations

from .design import (
    DesignStats,
    PoolingDesign,
    design_stats,
    dump_design,
    load_design,
    sample_design,
)
from .subsets import sample_subsets

__all__ = [
    "DesignStats",
    "PoolingDesign",
    "design_stats",
    "dump_design",
    "load_design",
    "sample_design",
    "sample_subsets",
]
