"""Realized first-stage pooling designs and their samplers."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from ..analytic.models import DesignParams, SchemeKind
from ..errors import InvalidParametersError
from .subsets import sample_subsets

# Upper bound on uniform draws held in memory at once when sampling RP incidences.
_RP_BLOCK_CELLS = 1 << 22


@dataclass(frozen=True, eq=False)
class PoolingDesign:
    """Individual-major incidence between ``n`` individuals and ``m`` pools.

    Stored in CSR form: the pools of individual ``i`` are
    ``indices[indptr[i]:indptr[i + 1]]``, distinct and sorted ascending.
    """

    n: int
    m: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self) -> None:
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        if self.n < 1 or self.m < 1:
            raise InvalidParametersError(f"design needs n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if indptr.shape != (self.n + 1,) or indptr[0] != 0 or indptr[-1] != indices.size:
            raise InvalidParametersError("indptr does not describe the membership array")
        if np.any(np.diff(indptr) < 0):
            raise InvalidParametersError("indptr must be non-decreasing")
        if indices.size and (indices.min() < 0 or indices.max() >= self.m):
            raise InvalidParametersError(f"pool indices must lie in [0, {self.m})")
        step = np.diff(indices)
        row_starts = indptr[1:-1]
        inner = np.ones(step.size, dtype=bool)
        inner[row_starts[(row_starts > 0) & (row_starts < indices.size)] - 1] = False
        if np.any(step[inner] <= 0):
            raise InvalidParametersError("each individual's pools must be distinct and sorted")
        indptr.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_membership(cls, n: int, m: int, membership: Sequence[Sequence[int]]) -> PoolingDesign:
        if len(membership) != n:
            raise InvalidParametersError(f"expected {n} membership lists, got {len(membership)}")
        counts = np.fromiter((len(pools) for pools in membership), dtype=np.int64, count=n)
        indptr = np.concatenate(([0], np.cumsum(counts)))
        flat = [pool for pools in membership for pool in pools]
        return cls(n=n, m=m, indptr=indptr, indices=np.asarray(flat, dtype=np.int64))

    @property
    def membership(self) -> list[list[int]]:
        return [
            self.indices[start:stop].tolist()
            for start, stop in zip(self.indptr[:-1], self.indptr[1:])
        ]

    def pools_of(self, individual: int) -> np.ndarray:
        return self.indices[self.indptr[individual] : self.indptr[individual + 1]]

    @cached_property
    def individual_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def pool_degrees(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.m)

    @cached_property
    def incidence(self) -> sparse.csr_matrix:
        """Sparse ``n x m`` 0/1 incidence matrix."""

        data = np.ones(self.indices.size, dtype=np.int32)
        return sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.m))

    @cached_property
    def pool_major(self) -> sparse.csr_matrix:
        """Sparse ``m x n`` incidence, one row per pool."""

        return self.incidence.transpose().tocsr()


@dataclass(frozen=True)
class DesignStats:
    """Degree counts of a design.

    ``individual_histogram[j]`` is the number of individuals in exactly ``j`` pools and
    ``pool_histogram[j]`` the number of pools with exactly ``j`` members.
    """

    individual_degrees: np.ndarray
    pool_degrees: np.ndarray
    individual_histogram: np.ndarray
    pool_histogram: np.ndarray
    total_incidence: int


def design_stats(design: PoolingDesign) -> DesignStats:
    individual = design.individual_degrees
    pool = design.pool_degrees
    return DesignStats(
        individual_degrees=individual,
        pool_degrees=pool,
        individual_histogram=np.bincount(individual, minlength=1),
        pool_histogram=np.bincount(pool, minlength=1),
        total_incidence=int(design.indices.size),
    )


def _from_pool_rows(n: int, m: int, rows: np.ndarray) -> PoolingDesign:
    # Convert pool-major member lists into individual-major CSR.
    members = rows.ravel()
    pools = np.repeat(np.arange(m, dtype=np.int64), rows.shape[1])
    order = np.lexsort((pools, members))
    counts = np.bincount(members, minlength=n)
    indptr = np.concatenate(([0], np.cumsum(counts)))
    return PoolingDesign(n=n, m=m, indptr=indptr, indices=pools[order])


def _sample_random_pooling(
    rng: np.random.Generator, n: int, m: int, a: float
) -> PoolingDesign:
    block = max(1, _RP_BLOCK_CELLS // m)
    counts: list[np.ndarray] = []
    columns: list[np.ndarray] = []
    for start in range(0, n, block):
        rows = min(block, n - start)
        hits = rng.random((rows, m)) < a
        counts.append(hits.sum(axis=1))
        columns.append(np.nonzero(hits)[1])
    indptr = np.concatenate(([0], np.cumsum(np.concatenate(counts))))
    return PoolingDesign(n=n, m=m, indptr=indptr, indices=np.concatenate(columns))


def sample_design(
    scheme: SchemeKind | str, n: int, params: DesignParams, rng: np.random.Generator
) -> PoolingDesign:
    """Sample a first-stage design.

    FTP: every pool draws a uniform b-subset of individuals. FTI: every individual draws a
    uniform d-subset of pools. RP: every (individual, pool) pair is included independently with
    probability a.
    """

    scheme = SchemeKind(scheme)
    if params.scheme is not scheme:
        raise InvalidParametersError(
            f"parameters are for {params.scheme.value}, not {scheme.value}"
        )
    params.require_realizable(n)
    m = params.pool_count
    if scheme is SchemeKind.FTP:
        return _from_pool_rows(n, m, sample_subsets(rng, m, n, int(params.secondary)))
    if scheme is SchemeKind.FTI:
        d = int(params.secondary)
        rows = sample_subsets(rng, n, m, d)
        indptr = np.arange(0, n * d + 1, d, dtype=np.int64)
        return PoolingDesign(n=n, m=m, indptr=indptr, indices=rows.ravel())
    return _sample_random_pooling(rng, n, m, params.secondary)


def dump_design(design: PoolingDesign) -> str:
    """Render ``individual: pool,pool,...`` lines."""

    lines = [
        f"{i}: {','.join(str(pool) for pool in pools)}"
        for i, pools in enumerate(design.membership)
    ]
    return "\n".join(lines) + "\n"


def load_design(text: str, m: int) -> PoolingDesign:
    """Parse the format written by :func:`dump_design`."""

    membership: list[list[int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        head, sep, tail = line.partition(":")
        if not sep or int(head) != len(membership):
            raise InvalidParametersError(f"line {line_no}: expected '{len(membership)}: ...'")
        tail = tail.strip()
        membership.append([int(token) for token in tail.split(",")] if tail else [])
    return PoolingDesign.from_membership(len(membership), m, membership)


__all__ = [
    "DesignStats",
    "PoolingDesign",
    "design_stats",
    "dump_design",
    "load_design",
    "sample_design",
]
