"""Infection draws and the two testing stages on a realized design."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..analytic.models import Binomial, ProblemInstance
from ..errors import InvalidParametersError
from ..pooling.design import PoolingDesign


@dataclass(frozen=True, eq=False)
class InfectionOutcome:
    """Sorted indices of the infected individuals of a population of size ``n``."""

    n: int
    infected: np.ndarray

    def __post_init__(self) -> None:
        infected = np.unique(np.asarray(self.infected, dtype=np.int64))
        if infected.size and (infected[0] < 0 or infected[-1] >= self.n):
            raise InvalidParametersError(f"infected indices must lie in [0, {self.n})")
        infected.setflags(write=False)
        object.__setattr__(self, "infected", infected)

    @property
    def count(self) -> int:
        return int(self.infected.size)

    def mask(self) -> np.ndarray:
        flags = np.zeros(self.n, dtype=bool)
        flags[self.infected] = True
        return flags


@dataclass(frozen=True, eq=False)
class StageOneResult:
    """Per-pool screening outcomes; ``True`` means positive."""

    pool_outcomes: np.ndarray

    @property
    def positive_pools(self) -> np.ndarray:
        return np.flatnonzero(self.pool_outcomes)


@dataclass(frozen=True, eq=False)
class TwoStageResult:
    suspects: np.ndarray
    stage1_tests: int
    stage2_tests: int
    identified_infected: np.ndarray
    stage1: StageOneResult

    @property
    def total_tests(self) -> int:
        return self.stage1_tests + self.stage2_tests


def draw_infected(inst: ProblemInstance, rng: np.random.Generator) -> InfectionOutcome:
    """Uniform k-subset for fixed-k instances, independent coin flips for binomial ones."""

    if isinstance(inst.model, Binomial):
        return InfectionOutcome(inst.n, np.flatnonzero(rng.random(inst.n) < inst.model.p))
    k = inst.infected_count()
    return InfectionOutcome(inst.n, rng.choice(inst.n, size=k, replace=False))


def screen_pools(design: PoolingDesign, infection: InfectionOutcome) -> StageOneResult:
    """Stage one: a pool is positive iff it contains at least one infected member."""

    if infection.n != design.n:
        raise InvalidParametersError(
            f"infection covers {infection.n} individuals, design has {design.n}"
        )
    hits = design.pool_major @ infection.mask().astype(np.int32)
    return StageOneResult(pool_outcomes=np.asarray(hits > 0).ravel())


def decode_suspects(design: PoolingDesign, stage1: StageOneResult) -> np.ndarray:
    """Individuals belonging to no negative pool, including those in no pool at all."""

    outcomes = np.asarray(stage1.pool_outcomes, dtype=bool)
    if outcomes.shape != (design.m,):
        raise InvalidParametersError(
            f"stage one reports {outcomes.size} pools, design has {design.m}"
        )
    negative_memberships = design.incidence @ (~outcomes).astype(np.int32)
    return np.flatnonzero(np.asarray(negative_memberships).ravel() == 0)


def run_two_stage(design: PoolingDesign, infection: InfectionOutcome) -> TwoStageResult:
    """Screen pools, decode suspects, then test every suspect individually."""

    stage1 = screen_pools(design, infection)
    suspects = decode_suspects(design, stage1)
    identified = suspects[infection.mask()[suspects]]
    return TwoStageResult(
        suspects=suspects,
        stage1_tests=design.m,
        stage2_tests=int(suspects.size),
        identified_infected=identified,
        stage1=stage1,
    )


__all__ = [
    "InfectionOutcome",
    "StageOneResult",
    "TwoStageResult",
    "decode_suspects",
    "draw_infected",
    "run_two_stage",
    "screen_pools",
]
