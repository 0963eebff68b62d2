"""Experiment sweeps over an infection axis and their CSV serialization."""

from __future__ import annotations

import csv
import math
import os
import tempfile
import time
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..analytic import (
    DesignParams,
    Mode,
    ProblemInstance,
    SchemeKind,
    closed_form_expected_tests,
    expected_total_tests,
    misspecification_inflation,
    refined_design,
)
from ..errors import InvalidParametersError
from ..simulation import run_replications
from ..utils.logging import get_logger
from ..utils.metrics import observe_axis_point

log = get_logger("harness")

ModelName = Literal["fixedk", "binomial"]

# Grid points are rounded to this many decimals so that 0.01 + 0.02 prints as 0.03.
_GRID_DECIMALS = 12


def parse_range(text: str, *, integer: bool = False) -> list[float]:
    """Expand ``start:stop:step`` into its grid; ``stop`` is included when it lies on the grid.

    A bare number is a one-point range.
    """

    parts = [part.strip() for part in text.split(":")]
    try:
        if len(parts) == 1:
            start = stop = float(parts[0])
            step = 1.0
        elif len(parts) == 3:
            start, stop, step = (float(part) for part in parts)
        else:
            raise ValueError(text)
    except ValueError as exc:
        raise InvalidParametersError(f"range must look like start:stop:step, got {text!r}") from exc
    if not step > 0:
        raise InvalidParametersError(f"range step must be positive, got {step}")
    if stop < start:
        raise InvalidParametersError(f"range {text!r} is empty")
    count = math.floor((stop - start) / step + 1e-9) + 1
    values = [round(start + i * step, _GRID_DECIMALS) for i in range(count)]
    if integer:
        if any(not value.is_integer() for value in values):
            raise InvalidParametersError(f"range {text!r} must contain integers only")
        return [float(int(value)) for value in values]
    return values


def _format(value: Any) -> str:
    if isinstance(value, float):
        return str(int(value)) if value.is_integer() and abs(value) < 2**53 else repr(value)
    return str(value)


class SweepSpec(BaseModel):
    """One sweep: schemes times axis points, ``reps`` replications each."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    schemes: tuple[SchemeKind, ...] = Field(min_length=1)
    n: int = Field(ge=2)
    model: ModelName = "fixedk"
    axis: tuple[float, ...] = Field(min_length=1)
    reps: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)
    out: Path | None = None
    fixed_design: bool = False
    workers: int = Field(1, ge=1)
    refine_window: int = Field(2, ge=0)

    @field_validator("schemes", mode="before")
    @classmethod
    def _expand_all(cls, value: Any) -> Any:
        if value == "all" or value == ("all",) or value == ["all"]:
            return tuple(SchemeKind)
        if isinstance(value, str):
            return (value,)
        return value

    @classmethod
    def create(cls, **payload: Any) -> SweepSpec:
        try:
            spec = cls.model_validate(payload)
        except ValidationError as exc:
            raise InvalidParametersError(str(exc)) from exc
        for point in spec.axis:
            spec.instance(point)
        return spec

    def instance(self, point: float) -> ProblemInstance:
        if self.model == "binomial":
            return ProblemInstance.binomial(self.n, point)
        inst = ProblemInstance.fixed_k(self.n, point)
        inst.infected_count()
        return inst


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    n: int
    model: str
    k_or_p: float
    m: int
    secondary: float
    reps: int
    mean_total: float
    stderr_total: float
    theory_total: float
    theory_closed_form: float
    seed: int

    @classmethod
    def header(cls) -> list[str]:
        return [field.name for field in fields(cls)]

    def as_csv(self) -> dict[str, str]:
        return {key: _format(value) for key, value in asdict(self).items()}


@dataclass(frozen=True)
class RobustnessRow:
    k_est: float
    inflation_theoretical: float
    inflation_simulated: float

    @classmethod
    def header(cls) -> list[str]:
        return [field.name for field in fields(cls)]

    def as_csv(self) -> dict[str, str]:
        return {key: _format(value) for key, value in asdict(self).items()}


def theory_row_total(scheme: str, n: int, model: str, k_or_p: float, m: int, secondary: float) -> float:
    """Recompute ``theory_total`` of a sweep row from its own columns."""

    if model == "binomial":
        inst = ProblemInstance.binomial(n, k_or_p)
    else:
        inst = ProblemInstance.fixed_k(n, k_or_p)
    params = DesignParams.create(scheme, m, secondary)
    return expected_total_tests(inst, params, Mode.PAPER_APPROX).expected_total_tests


def iter_sweep_rows(spec: SweepSpec) -> Iterator[SweepRow]:
    """Yield rows in axis order, schemes in the order given, for one sweep.

    Binomial points are designed from ``kbar = n p`` only. Every scheme at axis point ``j`` uses
    the replication streams ``mix(seed, j, r)``.
    """

    for j, point in enumerate(spec.axis):
        inst = spec.instance(point)
        for scheme in spec.schemes:
            started = time.perf_counter()
            params = refined_design(inst, scheme, spec.refine_window)
            summary = run_replications(
                inst,
                scheme,
                params,
                spec.reps,
                spec.seed,
                axis_index=j,
                fixed_design=spec.fixed_design,
                workers=spec.workers,
            )
            theory = expected_total_tests(inst, params, Mode.PAPER_APPROX).expected_total_tests
            row = SweepRow(
                scheme=scheme.value,
                n=spec.n,
                model=spec.model,
                k_or_p=inst.k_or_p,
                m=params.pool_count,
                secondary=params.secondary,
                reps=spec.reps,
                mean_total=summary.mean_total,
                stderr_total=summary.stderr_total,
                theory_total=theory,
                theory_closed_form=closed_form_expected_tests(inst, scheme),
                seed=spec.seed,
            )
            observe_axis_point("sweep", scheme.value, time.perf_counter() - started)
            log.info(
                "axis point done",
                extra={
                    "scheme": row.scheme,
                    "n": row.n,
                    "k_or_p": row.k_or_p,
                    "m": row.m,
                    "secondary": row.secondary,
                    "mean_total": row.mean_total,
                    "theory_total": row.theory_total,
                },
            )
            yield row


def sweep_rows(spec: SweepSpec) -> list[SweepRow]:
    return list(iter_sweep_rows(spec))


class RobustnessSpec(BaseModel):
    """Designs optimized for each estimate ``k_est``, all evaluated at the true ``k``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scheme: SchemeKind
    n: int = Field(ge=2)
    k_true: int = Field(ge=1)
    k_estimates: tuple[float, ...] = Field(min_length=1)
    reps: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)
    out: Path | None = None
    fixed_design: bool = False
    workers: int = Field(1, ge=1)
    refine_window: int = Field(2, ge=0)

    @classmethod
    def create(cls, **payload: Any) -> RobustnessSpec:
        try:
            spec = cls.model_validate(payload)
        except ValidationError as exc:
            raise InvalidParametersError(str(exc)) from exc
        spec.instance()
        if any(not 0 < k_est < spec.n for k_est in spec.k_estimates):
            raise InvalidParametersError(f"every k_est must lie in (0, {spec.n})")
        return spec

    def instance(self) -> ProblemInstance:
        return ProblemInstance.fixed_k(self.n, self.k_true)


def robustness_rows(spec: RobustnessSpec) -> list[RobustnessRow]:
    """Theoretical and simulated inflation for every estimate, in axis order.

    Simulated inflation divides the mean total of the misspecified design by that of the
    true-k design, both run on the streams of the same axis point.
    """

    inst = spec.instance()
    best = refined_design(inst, spec.scheme, spec.refine_window)
    rows: list[RobustnessRow] = []
    for j, k_est in enumerate(spec.k_estimates):
        started = time.perf_counter()
        theoretical = misspecification_inflation(
            inst, spec.scheme, k_est, refine=True, window=spec.refine_window
        )
        misspecified = refined_design(inst.with_k(k_est), spec.scheme, spec.refine_window)
        simulated = [
            run_replications(
                inst,
                spec.scheme,
                params,
                spec.reps,
                spec.seed,
                axis_index=j,
                fixed_design=spec.fixed_design,
                workers=spec.workers,
            ).mean_total
            for params in (misspecified, best)
        ]
        row = RobustnessRow(
            k_est=k_est,
            inflation_theoretical=theoretical,
            inflation_simulated=simulated[0] / simulated[1],
        )
        observe_axis_point("robustness", spec.scheme.value, time.perf_counter() - started)
        log.info(
            "robustness point done",
            extra={
                "scheme": spec.scheme.value,
                "k_true": spec.k_true,
                "k_est": k_est,
                "m": misspecified.pool_count,
                "secondary": misspecified.secondary,
                "inflation_theoretical": theoretical,
                "inflation_simulated": row.inflation_simulated,
            },
        )
        rows.append(row)
    return rows


def write_csv_atomic(
    path: str | Path, header: Sequence[str], rows: Iterable[SweepRow | RobustnessRow]
) -> Path:
    """Write rows to ``path`` through a temporary sibling file and an atomic rename.

    Nothing is left behind at ``path`` when producing or writing a row fails.
    """

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(header), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row.as_csv())
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return target


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Run a sweep and, when ``spec.out`` is set, write its CSV."""

    rows = sweep_rows(spec)
    if spec.out is not None:
        write_csv_atomic(spec.out, SweepRow.header(), rows)
        log.info("sweep written", extra={"path": str(spec.out), "rows": len(rows)})
    return rows


def run_robustness(spec: RobustnessSpec) -> list[RobustnessRow]:
    rows = robustness_rows(spec)
    if spec.out is not None:
        write_csv_atomic(spec.out, RobustnessRow.header(), rows)
        log.info("robustness written", extra={"path": str(spec.out), "rows": len(rows)})
    return rows


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
