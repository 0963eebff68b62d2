"""Continuous optima, integer realization and misspecification analysis."""

from __future__ import annotations

import math
from collections.abc import Iterable

import numpy as np
from scipy import optimize, stats

from ..errors import InfeasibleInstanceError, InvalidParametersError
from .formulas import expected_total_tests, objective_curve
from .models import (
    CONSTANTS,
    DesignParams,
    Mode,
    OptimumMode,
    ProblemInstance,
    SchemeKind,
)


def _positive_kbar(inst: ProblemInstance) -> float:
    k = inst.kbar
    if k <= 0:
        raise InfeasibleInstanceError("optimal design is undefined for a zero mean infected count")
    return k


def optimal_secondary(inst: ProblemInstance, scheme: SchemeKind | str, m: float | None = None) -> float:
    """Return b* = n/k, d* = (m/k) ln 2 or a* = 1/k, unrounded."""

    scheme = SchemeKind(scheme)
    k = _positive_kbar(inst)
    if scheme is SchemeKind.FTP:
        return inst.n / k
    if scheme is SchemeKind.RP:
        return 1.0 / k
    if m is None or m <= 0:
        raise InvalidParametersError("FTI optimum needs a positive pool count m")
    return (m / k) * CONSTANTS.ln2


def optimal_m(
    inst: ProblemInstance,
    scheme: SchemeKind | str,
    mode: OptimumMode | str = OptimumMode.EXACT_STATIONARY,
) -> float:
    """Continuous optimal pool count.

    FTP and RP share the stationary point of ``m + k + (n-k)(1 - 1/(ek))^m``; ``paper_approx``
    returns its ``e k ln((n-k)/k) - e k`` approximation. FTI returns
    ``(k / ln^2 2) ln(((n-k)/k) ln^2 2)`` in both modes.
    """

    scheme = SchemeKind(scheme)
    mode = OptimumMode(mode)
    k = _positive_kbar(inst)
    rest = inst.n - k

    if scheme is SchemeKind.FTI:
        argument = (rest / k) * CONSTANTS.ln2_sq
        if argument <= 0:
            raise InfeasibleInstanceError(f"no FTI optimum for n={inst.n}, k={k}")
        m_star = (k / CONSTANTS.ln2_sq) * math.log(argument)
    elif mode is OptimumMode.PAPER_APPROX:
        if rest <= 0:
            raise InfeasibleInstanceError(f"no pooling optimum for n={inst.n}, k={k}")
        m_star = CONSTANTS.euler_e * k * math.log(rest / k) - CONSTANTS.euler_e * k
    else:
        if CONSTANTS.euler_e * k <= 1.0:
            raise InfeasibleInstanceError(f"stationary condition undefined for k={k}")
        log_base = math.log1p(-1.0 / (CONSTANTS.euler_e * k))
        argument = -1.0 / (rest * log_base)
        if not argument > 0 or not math.isfinite(argument):
            raise InfeasibleInstanceError(f"no stationary pool count for n={inst.n}, k={k}")
        m_star = math.log(argument) / log_base

    if not m_star > 0:
        raise InfeasibleInstanceError(
            f"optimal pool count {m_star:.4g} is not positive for n={inst.n}, k={k}"
        )
    return m_star


def optimal_design(
    inst: ProblemInstance,
    scheme: SchemeKind | str,
    mode: OptimumMode | str = OptimumMode.EXACT_STATIONARY,
) -> DesignParams:
    """Continuous optimum (m*, secondary*) as a :class:`DesignParams`.

    RP's membership probability is capped at 1 when the mean infected count is below one.
    """

    scheme = SchemeKind(scheme)
    m_star = optimal_m(inst, scheme, mode)
    secondary = optimal_secondary(inst, scheme, m_star)
    if scheme is SchemeKind.RP:
        secondary = min(secondary, 1.0)
    return DesignParams.create(scheme, m_star, secondary)


def closed_form_expected_tests(inst: ProblemInstance, scheme: SchemeKind | str) -> float:
    """Expected tests at the continuous optimum, in closed form.

    FTP/RP: ``k + e k ln((n-k)/k)``. FTI: ``1.5557 k + (1/ln^2 2) k ln((n-k)/k)``. For a
    binomial instance ``k`` is ``n p`` and ``(n-k)/k`` equals ``(1-p)/p``.
    """

    scheme = SchemeKind(scheme)
    k = _positive_kbar(inst)
    log_term = math.log((inst.n - k) / k)
    if scheme is SchemeKind.FTI:
        return CONSTANTS.fti_linear_coeff * k + CONSTANTS.fti_log_coeff * k * log_term
    return k + CONSTANTS.euler_e * k * log_term


def _secondary_candidates(
    inst: ProblemInstance, scheme: SchemeKind, m: int, continuous: DesignParams
) -> list[float]:
    if scheme is SchemeKind.RP:
        return [continuous.secondary]
    if scheme is SchemeKind.FTP:
        target, upper = optimal_secondary(inst, scheme), inst.n
    else:
        target, upper = optimal_secondary(inst, scheme, m), m
    options = {min(max(math.floor(target), 1), upper), min(max(math.ceil(target), 1), upper)}
    return [float(value) for value in sorted(options)]


def integer_refine(
    inst: ProblemInstance,
    scheme: SchemeKind | str,
    continuous: DesignParams,
    window: int = 2,
) -> DesignParams:
    """Best integer design near a continuous optimum.

    Candidate pool counts are ``round(m*) - window .. round(m*) + window`` (at least 1); for each,
    b or d is the floor or ceiling of its optimum recomputed for that m, clamped to the valid
    range. RP keeps its real membership probability. The candidate with the lowest
    ``paper_approx`` expected tests wins; ties go to the smaller m, then the smaller secondary.
    """

    scheme = SchemeKind(scheme)
    center = math.floor(continuous.m + 0.5)
    pool_counts = sorted({max(1, center + offset) for offset in range(-window, window + 1)})
    best: tuple[float, int, float] | None = None
    for m in pool_counts:
        for secondary in _secondary_candidates(inst, scheme, m, continuous):
            candidate = DesignParams.create(scheme, m, secondary)
            total = expected_total_tests(inst, candidate, Mode.PAPER_APPROX).expected_total_tests
            key = (total, m, secondary)
            if best is None or key < best:
                best = key
    assert best is not None
    return DesignParams.create(scheme, best[1], best[2])


def refined_design(inst: ProblemInstance, scheme: SchemeKind | str, window: int = 2) -> DesignParams:
    """Continuous optimum followed by :func:`integer_refine`."""

    return integer_refine(inst, scheme, optimal_design(inst, scheme), window)


def misspecification_inflation(
    inst_true: ProblemInstance,
    scheme: SchemeKind | str,
    k_est: float,
    *,
    refine: bool = True,
    window: int = 2,
) -> float:
    """Expected-test inflation from designing for ``k_est`` instead of the true mean count.

    Both designs are evaluated at the true instance with the ``paper_approx`` formulas.
    """

    scheme = SchemeKind(scheme)
    if not k_est > 0:
        raise InvalidParametersError(f"estimated infected count must be positive, got {k_est}")
    try:
        estimated = inst_true.with_k(k_est)
    except InvalidParametersError as exc:
        raise InfeasibleInstanceError(f"no design for k_est={k_est}: {exc}") from exc

    def design(inst: ProblemInstance) -> DesignParams:
        if refine:
            return refined_design(inst, scheme, window)
        return optimal_design(inst, scheme)

    misspecified = design(estimated)
    if scheme is SchemeKind.FTP and misspecified.secondary > inst_true.n:
        raise InfeasibleInstanceError(f"pool size for k_est={k_est} exceeds the population")
    actual = expected_total_tests(inst_true, misspecified, Mode.PAPER_APPROX)
    best = expected_total_tests(inst_true, design(inst_true), Mode.PAPER_APPROX)
    return actual.expected_total_tests / best.expected_total_tests


def asymptotic_log_coefficient(
    scheme: SchemeKind | str, k: float, populations: Iterable[int]
) -> float:
    """Least-squares slope of closed-form ``E[T]/k`` against ``ln((n-k)/k)``."""

    ns = list(populations)
    if len(ns) < 2:
        raise InvalidParametersError("regression needs at least two population sizes")
    x = np.array([math.log((n - k) / k) for n in ns])
    y = np.array([closed_form_expected_tests(ProblemInstance.fixed_k(n, k), scheme) / k for n in ns])
    return float(stats.linregress(x, y).slope)


def numeric_optimal_secondary(inst: ProblemInstance, scheme: SchemeKind | str, m: float) -> float:
    """Minimize the scheme's objective curve numerically (bounded Brent search)."""

    curve = objective_curve(inst, scheme, m)
    lo, hi = curve.bounds()
    span = hi - lo
    result = optimize.minimize_scalar(
        curve.objective,
        bounds=(lo + 1e-9 * span, hi - 1e-9 * span),
        method="bounded",
        options={"xatol": 1e-10 * span},
    )
    return float(result.x)


__all__ = [
    "asymptotic_log_coefficient",
    "closed_form_expected_tests",
    "integer_refine",
    "misspecification_inflation",
    "numeric_optimal_secondary",
    "optimal_design",
    "optimal_m",
    "optimal_secondary",
    "refined_design",
]
