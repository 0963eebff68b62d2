"""Seeded, order-independent Monte Carlo replications of two-stage testing."""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..analytic.models import DesignParams, ProblemInstance, SchemeKind
from ..errors import InvalidParametersError
from ..pooling.design import PoolingDesign, sample_design
from ..utils.logging import get_logger
from ..utils.metrics import record_replications
from .two_stage import draw_infected, run_two_stage

log = get_logger("simulation")

MASK64 = (1 << 64) - 1
# Replication index reserved for the shared design of fixed-design runs.
FIXED_DESIGN_STREAM = MASK64


def splitmix64(value: int) -> int:
    """SplitMix64 finalizer (Steele, Lea and Flood) on a 64-bit unsigned integer."""

    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(base: int, axis_index: int, replication: int) -> int:
    """Seed of replication ``replication`` at sweep axis point ``axis_index``.

    ``mix(b, j, r) = s(s(s(b) ^ j) ^ r)`` with ``s`` = :func:`splitmix64`, all modulo 2**64.
    The value only depends on its arguments, so replications may run in any order.
    """

    state = splitmix64(base & MASK64)
    state = splitmix64(state ^ (axis_index & MASK64))
    return splitmix64(state ^ (replication & MASK64))


def replication_rng(base: int, axis_index: int, replication: int) -> np.random.Generator:
    return np.random.default_rng(mix(base, axis_index, replication))


@dataclass(frozen=True)
class ReplicationSummary:
    scheme: SchemeKind
    params: DesignParams
    reps: int
    mean_total: float
    stderr_total: float
    stderr_defined: bool
    mean_suspects: float
    mean_infected: float
    min_total: int
    max_total: int
    identification_violations: int
    token: str

    def as_dict(self) -> dict[str, object]:
        return {
            "scheme": self.scheme.value,
            **self.params.describe(),
            "reps": self.reps,
            "mean_total": self.mean_total,
            "stderr_total": self.stderr_total,
            "stderr_defined": self.stderr_defined,
            "mean_suspects": self.mean_suspects,
            "mean_infected": self.mean_infected,
            "min_total": self.min_total,
            "max_total": self.max_total,
            "identification_violations": self.identification_violations,
            "token": self.token,
        }


def run_replications(
    inst: ProblemInstance,
    scheme: SchemeKind | str,
    params: DesignParams,
    reps: int,
    seed: int,
    *,
    axis_index: int = 0,
    fixed_design: bool = False,
    workers: int = 1,
) -> ReplicationSummary:
    """Run ``reps`` independent two-stage replications and summarize the total test count.

    Replication ``r`` draws its randomness from ``mix(seed, axis_index, r)``. With
    ``fixed_design`` one design, drawn from the reserved stream, is shared and only the
    infected set varies between replications.
    """

    scheme = SchemeKind(scheme)
    if reps < 1:
        raise InvalidParametersError(f"reps must be at least 1, got {reps}")
    params.require_realizable(inst.n)
    shared: PoolingDesign | None = None
    if fixed_design:
        shared = sample_design(
            scheme, inst.n, params, replication_rng(seed, axis_index, FIXED_DESIGN_STREAM)
        )

    def replicate(r: int) -> tuple[int, int, int, bool]:
        rng = replication_rng(seed, axis_index, r)
        design = shared if shared is not None else sample_design(scheme, inst.n, params, rng)
        infection = draw_infected(inst, rng)
        result = run_two_stage(design, infection)
        exact = np.array_equal(result.identified_infected, infection.infected)
        return result.total_tests, result.stage2_tests, infection.count, exact

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(replicate, range(reps)))
    else:
        outcomes = [replicate(r) for r in range(reps)]

    totals = np.array([o[0] for o in outcomes], dtype=np.int64)
    suspects = np.array([o[1] for o in outcomes], dtype=np.int64)
    infected = np.array([o[2] for o in outcomes], dtype=np.int64)
    violations = sum(1 for o in outcomes if not o[3])

    mean_total = math.fsum(totals.tolist()) / reps
    stderr_defined = reps > 1
    stderr = float(np.std(totals, ddof=1) / math.sqrt(reps)) if stderr_defined else 0.0
    token = hashlib.blake2b(totals.tobytes(), digest_size=8).hexdigest()

    if violations:
        log.error(
            "infected set not recovered",
            extra={"scheme": scheme.value, "violations": violations, "reps": reps},
        )
    record_replications(
        scheme.value, reps, stage1_tests=params.pool_count * reps, stage2_tests=int(suspects.sum())
    )
    return ReplicationSummary(
        scheme=scheme,
        params=params,
        reps=reps,
        mean_total=mean_total,
        stderr_total=stderr,
        stderr_defined=stderr_defined,
        mean_suspects=float(suspects.mean()),
        mean_infected=float(infected.mean()),
        min_total=int(totals.min()),
        max_total=int(totals.max()),
        identification_violations=violations,
        token=token,
    )


__all__ = [
    "FIXED_DESIGN_STREAM",
    "ReplicationSummary",
    "mix",
    "replication_rng",
    "run_replications",
    "splitmix64",
]
