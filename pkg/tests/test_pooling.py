from collections import Counter

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given

from twostage.analytic import DesignParams
from twostage.errors import InvalidParametersError
from twostage.pooling import (
    PoolingDesign,
    design_stats,
    dump_design,
    load_design,
    sample_design,
    sample_subsets,
)
from twostage.pooling import design as design_module


@given(
    population=st.integers(min_value=1, max_value=60),
    data=st.data(),
    rows=st.integers(min_value=0, max_value=12),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_sampled_subsets_are_sorted_distinct_and_in_range(
    population: int, data: st.DataObject, rows: int, seed: int
) -> None:
    size = data.draw(st.integers(min_value=0, max_value=population))
    chosen = sample_subsets(np.random.default_rng(seed), rows, population, size)
    assert chosen.shape == (rows, size)
    if size and rows:
        assert chosen.min() >= 0
        assert chosen.max() < population
        assert np.all(np.diff(chosen, axis=1) > 0)


@pytest.mark.parametrize(("population", "size"), [(4, 2), (5, 4)])
def test_subsets_are_uniform(rng: np.random.Generator, population: int, size: int) -> None:
    draws = 60_000
    counts = Counter(map(tuple, sample_subsets(rng, draws, population, size).tolist()))
    subsets = len(counts)
    expected = draws / subsets
    sd = (draws * (1 / subsets) * (1 - 1 / subsets)) ** 0.5
    assert subsets == {(4, 2): 6, (5, 4): 5}[(population, size)]
    assert all(abs(count - expected) < 5 * sd for count in counts.values())


def test_sample_subsets_rejects_oversized_draws(rng: np.random.Generator) -> None:
    with pytest.raises(ValueError):
        sample_subsets(rng, 1, 3, 4)


def test_full_pool_and_full_degree_designs(rng: np.random.Generator) -> None:
    ftp = sample_design("ftp", 3, DesignParams.create("ftp", 1, 3), rng)
    assert ftp.membership == [[0], [0], [0]]
    fti = sample_design("fti", 5, DesignParams.create("fti", 4, 4), rng)
    assert fti.membership == [[0, 1, 2, 3]] * 5


def test_fixed_pool_size_and_fixed_degree_hold_for_every_sample(rng: np.random.Generator) -> None:
    ftp_params = DesignParams.create("ftp", 5, 4)
    fti_params = DesignParams.create("fti", 5, 2)
    for _ in range(1000):
        ftp = sample_design("ftp", 12, ftp_params, rng)
        assert np.all(ftp.pool_degrees == 4)
        fti = sample_design("fti", 12, fti_params, rng)
        assert np.all(fti.individual_degrees == 2)


@given(
    n=st.integers(min_value=1, max_value=40),
    m=st.integers(min_value=1, max_value=15),
    data=st.data(),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_sampled_designs_respect_scheme_degrees(
    n: int, m: int, data: st.DataObject, seed: int
) -> None:
    rng = np.random.default_rng(seed)
    b = data.draw(st.integers(min_value=1, max_value=n))
    d = data.draw(st.integers(min_value=1, max_value=m))
    ftp = sample_design("ftp", n, DesignParams.create("ftp", m, b), rng)
    fti = sample_design("fti", n, DesignParams.create("fti", m, d), rng)
    assert ftp.pool_degrees.tolist() == [b] * m
    assert fti.individual_degrees.tolist() == [d] * n
    for design in (ftp, fti):
        stats = design_stats(design)
        assert stats.pool_degrees.sum() == stats.individual_degrees.sum() == stats.total_incidence


def test_design_stats_match_illustrated_examples(rng: np.random.Generator) -> None:
    ftp = design_stats(sample_design("ftp", 12, DesignParams.create("ftp", 5, 4), rng))
    assert ftp.total_incidence == 20
    assert ftp.pool_histogram[4] == 5
    fti = design_stats(sample_design("fti", 12, DesignParams.create("fti", 5, 2), rng))
    assert fti.total_incidence == 24
    assert fti.individual_histogram[2] == 12


def test_empty_membership_design_is_valid() -> None:
    design = PoolingDesign.from_membership(4, 3, [[], [], [], []])
    stats = design_stats(design)
    assert stats.total_incidence == 0
    assert stats.individual_degrees.tolist() == [0, 0, 0, 0]
    assert stats.pool_degrees.tolist() == [0, 0, 0]


def test_fti_pool_membership_mean(rng: np.random.Generator) -> None:
    params = DesignParams.create("fti", 80, 6)
    samples = 200
    total = np.zeros(80)
    for _ in range(samples):
        total += sample_design("fti", 10_000, params, rng).pool_degrees
    mean = total / samples
    sd = (10_000 * (6 / 80) * (1 - 6 / 80) / samples) ** 0.5
    assert np.all(np.abs(mean - 750) < 5 * sd)


def test_random_pooling_incidence_mean(rng: np.random.Generator) -> None:
    n, m, a = 50, 20, 0.1
    params = DesignParams.create("rp", m, a)
    samples = 400
    totals = np.array(
        [design_stats(sample_design("rp", n, params, rng)).total_incidence for _ in range(samples)]
    )
    standard_error = (n * m * a * (1 - a) / samples) ** 0.5
    assert abs(totals.mean() - n * m * a) < 4 * standard_error


def test_random_pooling_with_certain_membership(rng: np.random.Generator) -> None:
    design = sample_design("rp", 6, DesignParams.create("rp", 3, 1.0), rng)
    assert design.membership == [[0, 1, 2]] * 6


def test_random_pooling_blocks_do_not_change_the_draw(monkeypatch: pytest.MonkeyPatch) -> None:
    params = DesignParams.create("rp", 9, 0.3)
    whole = sample_design("rp", 40, params, np.random.default_rng(5))
    monkeypatch.setattr(design_module, "_RP_BLOCK_CELLS", 20)
    blocked = sample_design("rp", 40, params, np.random.default_rng(5))
    assert np.array_equal(whole.indptr, blocked.indptr)
    assert np.array_equal(whole.indices, blocked.indices)


@pytest.mark.parametrize(
    ("scheme", "m", "secondary"), [("ftp", 7, 5), ("fti", 7, 3), ("rp", 7, 0.2)]
)
def test_sampling_is_deterministic_per_seed(scheme: str, m: int, secondary: float) -> None:
    params = DesignParams.create(scheme, m, secondary)
    first = sample_design(scheme, 30, params, np.random.default_rng(99))
    second = sample_design(scheme, 30, params, np.random.default_rng(99))
    assert first.membership == second.membership


def test_sampling_rejects_unrealizable_parameters(rng: np.random.Generator) -> None:
    with pytest.raises(InvalidParametersError):
        sample_design("fti", 10, DesignParams.create("ftp", 3, 2), rng)
    with pytest.raises(InvalidParametersError):
        sample_design("ftp", 10, DesignParams.create("ftp", 3, 2.5), rng)
    with pytest.raises(InvalidParametersError):
        sample_design("ftp", 10, DesignParams.create("ftp", 3, 11), rng)
    with pytest.raises(InvalidParametersError):
        sample_design("rp", 10, DesignParams.create("rp", 2.5, 0.5), rng)


def test_design_validation() -> None:
    with pytest.raises(InvalidParametersError):
        PoolingDesign.from_membership(2, 3, [[1, 0], [2]])
    with pytest.raises(InvalidParametersError):
        PoolingDesign.from_membership(2, 3, [[0, 0], [2]])
    with pytest.raises(InvalidParametersError):
        PoolingDesign.from_membership(2, 3, [[0, 3], []])
    with pytest.raises(InvalidParametersError):
        PoolingDesign.from_membership(3, 3, [[0], [1]])
    design = PoolingDesign.from_membership(3, 3, [[2], [0, 1], [1]])
    assert design.pools_of(1).tolist() == [0, 1]
    with pytest.raises(ValueError):
        design.indices[0] = 1


def test_incidence_views() -> None:
    design = PoolingDesign.from_membership(3, 2, [[0, 1], [], [1]])
    assert design.incidence.toarray().tolist() == [[1, 1], [0, 0], [0, 1]]
    assert design.pool_major.toarray().tolist() == [[1, 0, 0], [1, 0, 1]]


def test_dump_format() -> None:
    design = PoolingDesign.from_membership(3, 2, [[0, 1], [], [1]])
    text = dump_design(design)
    assert text == "0: 0,1\n1: \n2: 1\n"
    assert load_design(text, 2).membership == design.membership


def test_load_design_rejects_out_of_order_lines() -> None:
    with pytest.raises(InvalidParametersError):
        load_design("0: 1\n2: 0\n", 2)
    with pytest.raises(InvalidParametersError):
        load_design("0 1\n", 2)
