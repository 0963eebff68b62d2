"""Validated value types shared by the analytic, pooling and simulation layers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import InvalidParametersError


class SchemeKind(str, Enum):
    """Randomized first-stage pooling schemes."""

    FTP = "ftp"
    FTI = "fti"
    RP = "rp"

    @property
    def secondary_name(self) -> str:
        """Name of the scheme's second design parameter."""

        return {"ftp": "b", "fti": "d", "rp": "a"}[self.value]


class Mode(str, Enum):
    """Evaluation mode for pool probabilities and expected test counts.

    ``PAPER_APPROX`` evaluates the published formulas (exponential substitution inside
    ``E[T]``); ``EXACT`` evaluates the pre-approximation forms. For
    :func:`~twostage.analytic.formulas.expected_total_tests` the exact mode is the
    "exact form" of the expectation.
    """

    PAPER_APPROX = "paper_approx"
    EXACT = "exact"

    @classmethod
    def _missing_(cls, value: object) -> Mode | None:
        aliases = {"paper": cls.PAPER_APPROX, "exact_form": cls.EXACT}
        if isinstance(value, str):
            return aliases.get(value.strip().lower())
        return None


class OptimumMode(str, Enum):
    """How the continuous optimal pool count is obtained."""

    EXACT_STATIONARY = "exact_stationary"
    PAPER_APPROX = "paper_approx"


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class FixedK(_Frozen):
    """Exactly ``k`` infected individuals.

    ``k`` may be fractional when it stands for a designer's estimate; operations that need a
    count check :attr:`is_integral`.
    """

    kind: Literal["fixedk"] = "fixedk"
    k: float = Field(ge=0.0)

    @property
    def is_integral(self) -> bool:
        return float(self.k).is_integer()


class Binomial(_Frozen):
    """Each individual infected independently with probability ``p``."""

    kind: Literal["binomial"] = "binomial"
    p: float = Field(gt=0.0, lt=1.0)


InfectionModel = Annotated[Union[FixedK, Binomial], Field(discriminator="kind")]


class ProblemInstance(_Frozen):
    """Population size plus infection model."""

    n: int = Field(ge=2)
    model: InfectionModel

    @model_validator(mode="after")
    def _k_below_n(self) -> ProblemInstance:
        if isinstance(self.model, FixedK) and self.model.k >= self.n:
            raise ValueError(f"infected count k={self.model.k} must be below n={self.n}")
        return self

    @classmethod
    def fixed_k(cls, n: int, k: float) -> ProblemInstance:
        return _build(cls, n=n, model={"kind": "fixedk", "k": k})

    @classmethod
    def binomial(cls, n: int, p: float) -> ProblemInstance:
        return _build(cls, n=n, model={"kind": "binomial", "p": p})

    @property
    def kbar(self) -> float:
        """Mean infected count: ``k`` or ``n * p``."""

        if isinstance(self.model, FixedK):
            return float(self.model.k)
        return self.n * self.model.p

    @property
    def is_binomial(self) -> bool:
        return isinstance(self.model, Binomial)

    @property
    def model_name(self) -> str:
        return self.model.kind

    @property
    def k_or_p(self) -> float:
        return self.model.p if isinstance(self.model, Binomial) else float(self.model.k)

    def infected_count(self) -> int:
        """Return the integral infected count of a fixed-k instance."""

        if not isinstance(self.model, FixedK) or not self.model.is_integral:
            raise InvalidParametersError(
                "an integral fixed infected count is required for this operation"
            )
        return int(self.model.k)

    def with_k(self, k: float) -> ProblemInstance:
        """Fixed-k instance over the same population."""

        return type(self).fixed_k(self.n, k)


class DesignParams(_Frozen):
    """Scheme tag, pool count and the scheme's second parameter (b, d or a).

    Continuous optima are allowed to carry real ``m`` and ``secondary``, so an FTI degree may
    fall in (0, 1) for tiny instances. :meth:`require_realizable` enforces the integer
    constraints of a sampled design, including ``1 <= d <= m``.
    """

    scheme: SchemeKind
    m: float = Field(gt=0.0)
    secondary: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _secondary_range(self) -> DesignParams:
        if self.scheme is SchemeKind.FTP and self.secondary < 1.0:
            raise ValueError(f"FTP pool size b={self.secondary} must be at least 1")
        if self.scheme is SchemeKind.FTI and self.secondary > self.m:
            raise ValueError(f"FTI degree d={self.secondary} exceeds pool count m={self.m}")
        if self.scheme is SchemeKind.RP and self.secondary > 1.0:
            raise ValueError(f"RP membership probability a={self.secondary} exceeds 1")
        return self

    @classmethod
    def create(cls, scheme: SchemeKind | str, m: float, secondary: float) -> DesignParams:
        return _build(cls, scheme=SchemeKind(scheme), m=m, secondary=secondary)

    def check_instance(self, inst: ProblemInstance) -> None:
        """Validate the parameters against a population size."""

        if self.scheme is SchemeKind.FTP and self.secondary > inst.n:
            raise InvalidParametersError(
                f"FTP pool size b={self.secondary} exceeds population n={inst.n}"
            )

    @property
    def pool_count(self) -> int:
        return int(self.m)

    def require_realizable(self, n: int) -> None:
        """Raise unless the parameters describe a design that can be sampled."""

        if not float(self.m).is_integer() or self.m < 1:
            raise InvalidParametersError(f"pool count m={self.m} must be a positive integer")
        if self.scheme is SchemeKind.RP:
            return
        if not float(self.secondary).is_integer():
            raise InvalidParametersError(
                f"{self.scheme.secondary_name}={self.secondary} must be an integer"
            )
        if self.scheme is SchemeKind.FTP and self.secondary > n:
            raise InvalidParametersError(f"FTP pool size b={self.secondary} exceeds n={n}")

    def describe(self) -> dict[str, Any]:
        return {"scheme": self.scheme.value, "m": self.m, self.scheme.secondary_name: self.secondary}


class AnalyticPrediction(_Frozen):
    """Pool probabilities and the expected total test count of one design."""

    non_selection_prob: float = Field(ge=0.0, le=1.0)
    pool_negative_prob: float = Field(ge=0.0, le=1.0)
    pool_positive_prob: float = Field(ge=0.0, le=1.0)
    uninfected_suspect_prob: float = Field(ge=0.0, le=1.0)
    expected_total_tests: float = Field(ge=0.0)


@dataclass(frozen=True)
class Constants:
    euler_e: float = math.e
    ln2: float = math.log(2.0)
    ln2_sq: float = math.log(2.0) ** 2
    beta: float = 0.5 ** math.log(2.0)
    fti_linear_coeff: float = (
        1.0 + 1.0 / math.log(2.0) ** 2 + 2.0 * math.log(math.log(2.0)) / math.log(2.0) ** 2
    )
    fti_log_coeff: float = 1.0 / math.log(2.0) ** 2


CONSTANTS = Constants()


def _build(model_cls: type[Any], /, **payload: Any) -> Any:
    try:
        return model_cls.model_validate(payload)
    except ValidationError as exc:
        raise InvalidParametersError(str(exc)) from exc


__all__ = [
    "AnalyticPrediction",
    "Binomial",
    "CONSTANTS",
    "Constants",
    "DesignParams",
    "FixedK",
    "Mode",
    "OptimumMode",
    "ProblemInstance",
    "SchemeKind",
]
