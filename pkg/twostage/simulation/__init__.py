"""Two-stage screening simulation on sampled designs."""

from __future__ import annotations

from .replications import (
    FIXED_DESIGN_STREAM,
    ReplicationSummary,
    mix,
    replication_rng,
    run_replications,
    splitmix64,
)
from .two_stage import (
    InfectionOutcome,
    StageOneResult,
    TwoStageResult,
    decode_suspects,
    draw_infected,
    run_two_stage,
    screen_pools,
)

__all__ = [
    "FIXED_DESIGN_STREAM",
    "InfectionOutcome",
    "ReplicationSummary",
    "StageOneResult",
    "TwoStageResult",
    "decode_suspects",
    "draw_infected",
    "mix",
    "replication_rng",
    "run_replications",
    "run_two_stage",
    "screen_pools",
    "splitmix64",
]
