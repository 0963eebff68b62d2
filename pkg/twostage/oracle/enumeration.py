"""Exact expected test counts of tiny instances by exhaustive enumeration."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction

from ..analytic.formulas import expected_total_tests
from ..analytic.models import DesignParams, Mode, ProblemInstance, SchemeKind
from ..errors import BudgetExceededError, InvalidParametersError
from ..utils.logging import get_logger
from ..utils.metrics import record_oracle_states

log = get_logger("oracle")

DEFAULT_BUDGET = 10_000_000


@dataclass(frozen=True)
class EnumerationResult:
    exact_expected_T: Fraction
    state_count: int
    design_count: int
    infection_count: int

    @property
    def expected_tests(self) -> float:
        return float(self.exact_expected_T)


@dataclass(frozen=True)
class OracleComparison:
    enumeration: EnumerationResult
    paper_approx: float
    exact_form: float

    @property
    def exact(self) -> float:
        return self.enumeration.expected_tests

    def gaps(self) -> dict[str, float]:
        exact = self.exact
        return {
            "paper_abs_gap": self.paper_approx - exact,
            "paper_rel_gap": (self.paper_approx - exact) / exact,
            "exact_form_abs_gap": self.exact_form - exact,
            "exact_form_rel_gap": (self.exact_form - exact) / exact,
        }


def design_space_size(scheme: SchemeKind | str, n: int, params: DesignParams) -> int:
    scheme = SchemeKind(scheme)
    m = params.pool_count
    if scheme is SchemeKind.FTP:
        return math.comb(n, int(params.secondary)) ** m
    if scheme is SchemeKind.FTI:
        return math.comb(m, int(params.secondary)) ** n
    return 2 ** (n * m)


def _masks(pools_per_individual: Sequence[Sequence[int]]) -> list[int]:
    return [sum(1 << pool for pool in pools) for pools in pools_per_individual]


def _weighted_designs(
    scheme: SchemeKind, n: int, params: DesignParams
) -> Iterator[tuple[list[int], Fraction | None]]:
    # Yields (per-individual pool bitmasks, probability weight) in lexicographic rank order;
    # weight None marks the equiprobable FTP and FTI design spaces.
    m = params.pool_count
    if scheme is SchemeKind.FTP:
        b = int(params.secondary)
        for pools in itertools.product(itertools.combinations(range(n), b), repeat=m):
            masks = [0] * n
            for pool, members in enumerate(pools):
                for individual in members:
                    masks[individual] |= 1 << pool
            yield masks, None
    elif scheme is SchemeKind.FTI:
        d = int(params.secondary)
        for choice in itertools.product(itertools.combinations(range(m), d), repeat=n):
            yield _masks(choice), None
    else:
        a = Fraction(params.secondary)
        for cells in itertools.product((0, 1), repeat=n * m):
            ones = sum(cells)
            weight = a**ones * (1 - a) ** (n * m - ones)
            masks = [
                sum(bit << pool for pool, bit in enumerate(cells[i * m : (i + 1) * m]))
                for i in range(n)
            ]
            yield masks, weight


def enumerate_expected_tests(
    inst: ProblemInstance,
    scheme: SchemeKind | str,
    params: DesignParams,
    budget: int = DEFAULT_BUDGET,
) -> EnumerationResult:
    """Average ``T = m + |S|`` over every (design, infected set) pair, exactly.

    Designs are weighted by their sampling probability (uniform for FTP and FTI, ``a`` per
    included cell and ``1 - a`` per excluded cell for RP); infected sets are uniform k-subsets.
    """

    scheme = SchemeKind(scheme)
    if inst.is_binomial:
        raise InvalidParametersError("enumeration supports fixed-k instances only")
    params.require_realizable(inst.n)
    if params.scheme is not scheme:
        raise InvalidParametersError(f"parameters are for {params.scheme.value}, not {scheme.value}")
    n, k, m = inst.n, inst.infected_count(), params.pool_count

    designs = design_space_size(scheme, n, params)
    infections = math.comb(n, k)
    states = designs * infections
    if states > budget:
        raise BudgetExceededError(states, budget)

    infected_sets = list(itertools.combinations(range(n), k))
    everyone = (1 << m) - 1
    uniform_tests = 0
    uniform_designs = 0
    weighted_tests = Fraction(0)
    total_weight = Fraction(0)
    for masks, weight in _weighted_designs(scheme, n, params):
        multiplicity = Counter(masks)
        tests = m * infections
        for infected in infected_sets:
            positive = 0
            for individual in infected:
                positive |= masks[individual]
            negative = everyone & ~positive
            tests += sum(count for mask, count in multiplicity.items() if not mask & negative)
        if weight is None:
            uniform_tests += tests
            uniform_designs += 1
        else:
            weighted_tests += weight * tests
            total_weight += weight

    if uniform_designs:
        expected = Fraction(uniform_tests, uniform_designs * infections)
    else:
        expected = weighted_tests / (total_weight * infections)

    record_oracle_states(scheme.value, states)
    log.info(
        "enumeration finished",
        extra={"scheme": scheme.value, "n": n, "k": k, "m": m, "states": states},
    )
    return EnumerationResult(
        exact_expected_T=expected,
        state_count=states,
        design_count=designs,
        infection_count=infections,
    )


def compare_with_analytic(
    inst: ProblemInstance,
    scheme: SchemeKind | str,
    params: DesignParams,
    budget: int = DEFAULT_BUDGET,
) -> OracleComparison:
    """Enumerate and set the result against both analytic evaluation modes."""

    scheme = SchemeKind(scheme)
    enumeration = enumerate_expected_tests(inst, scheme, params, budget)
    paper = expected_total_tests(inst, params, Mode.PAPER_APPROX).expected_total_tests
    exact_form = expected_total_tests(inst, params, Mode.EXACT).expected_total_tests
    return OracleComparison(enumeration=enumeration, paper_approx=paper, exact_form=exact_form)


__all__ = [
    "DEFAULT_BUDGET",
    "EnumerationResult",
    "OracleComparison",
    "compare_with_analytic",
    "design_space_size",
    "enumerate_expected_tests",
]
