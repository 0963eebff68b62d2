"""Closed-form pool probabilities and expected test counts for the three schemes."""

from __future__ import annotations

import math

import numpy as np
from pydantic import Field

from ..errors import InvalidParametersError
from .models import (
    CONSTANTS,
    AnalyticPrediction,
    DesignParams,
    Mode,
    ProblemInstance,
    SchemeKind,
    _Frozen,
)


def avoidance_prob(population: int, marked: int, draws: int) -> float:
    """Probability that ``draws`` items sampled without replacement miss all ``marked`` items.

    Equals ``C(population - marked, draws) / C(population, draws)``, evaluated as a product so
    that large populations do not overflow.
    """

    if draws > population - marked:
        return 0.0
    if marked == 0 or draws == 0:
        return 1.0
    i = np.arange(draws, dtype=np.float64)
    return float(np.prod((population - marked - i) / (population - i)))


def _integral(value: float, name: str) -> int:
    if not float(value).is_integer():
        raise InvalidParametersError(f"{name}={value} must be an integer in exact mode")
    return int(value)


def pool_negative_prob(
    inst: ProblemInstance, params: DesignParams, mode: Mode | str = Mode.PAPER_APPROX
) -> float:
    """Probability that a given first-stage pool contains no infected individual.

    ``paper_approx`` returns ``(1-b/n)^k``, ``(1-d/m)^k`` or ``(1-a)^k`` with ``k`` replaced by
    ``kbar`` for binomial instances. ``exact`` returns the hypergeometric avoidance probability
    for FTP and the same value as ``paper_approx`` for FTI and RP, which are exact already.
    """

    mode = Mode(mode)
    params.check_instance(inst)
    k = inst.kbar
    if params.scheme is SchemeKind.FTP:
        if mode is Mode.EXACT:
            b = _integral(params.secondary, "b")
            return avoidance_prob(inst.n, inst.infected_count(), b)
        return (1.0 - params.secondary / inst.n) ** k
    if params.scheme is SchemeKind.FTI:
        return (1.0 - params.secondary / params.m) ** k
    return (1.0 - params.secondary) ** k


def binomial_pool_negative_prob(inst: ProblemInstance, params: DesignParams) -> float:
    """Pool-negative probability averaged over the binomial infected count.

    Each individual is infected and selected independently, so a pool is negative with
    probability ``(1 - p * s)^n`` where ``s`` is the per-individual selection probability.
    """

    if not inst.is_binomial:
        raise InvalidParametersError("binomial mixture requires a binomial infection model")
    params.check_instance(inst)
    p = inst.k_or_p
    if params.scheme is SchemeKind.FTP:
        selection = params.secondary / inst.n
    elif params.scheme is SchemeKind.FTI:
        selection = params.secondary / params.m
    else:
        selection = params.secondary
    return (1.0 - p * selection) ** inst.n


def expected_total_tests(
    inst: ProblemInstance, params: DesignParams, mode: Mode | str = Mode.PAPER_APPROX
) -> AnalyticPrediction:
    """Evaluate ``E[T] = m + kbar + (n - kbar) * t_p`` for a design.

    ``t_p`` is the probability that an uninfected individual ends up a suspect. In
    ``paper_approx`` mode it uses the published exponential forms; in ``exact`` mode it uses
    the pre-exponential forms. For FTP the exact form conditions the pool-negative probability
    on the pool containing the uninfected individual under evaluation.
    """

    mode = Mode(mode)
    params.check_instance(inst)
    n, k, m, s = inst.n, inst.kbar, params.m, params.secondary
    scheme = params.scheme

    if scheme is SchemeKind.FTP:
        selection = s / n
        if mode is Mode.EXACT:
            infected = inst.infected_count()
            b = _integral(s, "b")
            negative = avoidance_prob(n, infected, b)
            conditional = avoidance_prob(n - 1, infected, b - 1)
        else:
            negative = conditional = math.exp(-k * selection)
        suspect = (1.0 - selection * conditional) ** m
    elif scheme is SchemeKind.FTI:
        selection = s / m
        negative = (1.0 - selection) ** k if mode is Mode.EXACT else math.exp(-k * selection)
        suspect = (1.0 - negative) ** s
    else:
        selection = s
        negative = (1.0 - s) ** k if mode is Mode.EXACT else math.exp(-k * s)
        suspect = (1.0 - s * negative) ** m

    return AnalyticPrediction(
        non_selection_prob=1.0 - selection,
        pool_negative_prob=negative,
        pool_positive_prob=1.0 - negative,
        uninfected_suspect_prob=suspect,
        expected_total_tests=m + k + (n - k) * suspect,
    )


class ObjectiveCurve(_Frozen):
    """Per-pool exponent base for a fixed pool count, plus its normalized pool-count form."""

    scheme: SchemeKind
    n: int = Field(ge=2)
    kbar: float = Field(gt=0.0)
    m: float = Field(gt=0.0)

    def objective(self, secondary: float) -> float:
        """G(b), f(d) or G(a): the quantity minimized over the second parameter."""

        k = self.kbar
        if self.scheme is SchemeKind.FTP:
            x = secondary / self.n
            return 1.0 - x * math.exp(-k * x)
        if self.scheme is SchemeKind.FTI:
            return (1.0 - math.exp(-k * secondary / self.m)) ** secondary
        return 1.0 - secondary * math.exp(-k * secondary)

    def normalized(self, y: float) -> float:
        """g(y) = 1 + y + ((n - k) / k) * beta^y with y = m / k."""

        ratio = (self.n - self.kbar) / self.kbar
        return 1.0 + y + ratio * CONSTANTS.beta**y

    @property
    def y(self) -> float:
        return self.m / self.kbar

    def bounds(self) -> tuple[float, float]:
        """Open search interval for the second parameter."""

        if self.scheme is SchemeKind.FTP:
            return 0.0, float(self.n)
        if self.scheme is SchemeKind.FTI:
            return 0.0, float(self.m)
        return 0.0, 1.0


def objective_curve(inst: ProblemInstance, scheme: SchemeKind | str, m: float) -> ObjectiveCurve:
    if inst.kbar <= 0:
        raise InvalidParametersError("objective curves need a positive mean infected count")
    return ObjectiveCurve(scheme=SchemeKind(scheme), n=inst.n, kbar=inst.kbar, m=m)


def scan_objective(curve: ObjectiveCurve, points: int = 100_001) -> float:
    """Grid minimizer of the curve's objective over its open search interval."""

    lo, hi = curve.bounds()
    grid = np.linspace(lo, hi, points)[1:-1]
    values = np.fromiter((curve.objective(float(x)) for x in grid), dtype=np.float64)
    return float(grid[int(np.argmin(values))])


def efficiency_ratio(inst: ProblemInstance, expected_tests: float) -> float:
    """Expected tests per ``kbar * ln(n / kbar)``."""

    k = inst.kbar
    if k <= 0:
        raise InvalidParametersError("efficiency is undefined without infected individuals")
    return expected_tests / (k * math.log(inst.n / k))


def individual_testing_savings(inst: ProblemInstance, expected_tests: float) -> float:
    """Fraction of tests saved relative to testing every individual once."""

    return 1.0 - expected_tests / inst.n


__all__ = [
    "ObjectiveCurve",
    "avoidance_prob",
    "binomial_pool_negative_prob",
    "efficiency_ratio",
    "expected_total_tests",
    "individual_testing_savings",
    "objective_curve",
    "pool_negative_prob",
    "scan_objective",
]
