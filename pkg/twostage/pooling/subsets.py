"""Uniform fixed-size subset sampling, vectorized over independent rows."""

from __future__ import annotations

import numpy as np


def _floyd_rows(rng: np.random.Generator, rows: int, population: int, size: int) -> np.ndarray:
    # Floyd's algorithm: for j in population-size .. population-1 draw t in [0, j];
    # keep t unless already chosen, in which case keep j.
    chosen = np.empty((rows, size), dtype=np.int64)
    for col, j in enumerate(range(population - size, population)):
        draw = rng.integers(0, j + 1, size=rows, dtype=np.int64)
        if col:
            seen = (chosen[:, :col] == draw[:, None]).any(axis=1)
            draw = np.where(seen, j, draw)
        chosen[:, col] = draw
    return chosen


def _random_key_rows(rng: np.random.Generator, rows: int, population: int, size: int) -> np.ndarray:
    # The positions of the `size` smallest of i.i.d. uniform keys form a uniform subset.
    keys = rng.random((rows, population))
    return np.argpartition(keys, size - 1, axis=1)[:, :size].astype(np.int64)


def sample_subsets(
    rng: np.random.Generator, rows: int, population: int, size: int
) -> np.ndarray:
    """Draw ``rows`` independent uniform ``size``-subsets of ``range(population)``.

    Returns an integer array of shape ``(rows, size)`` with each row sorted ascending.
    """

    if not 0 <= size <= population:
        raise ValueError(f"cannot draw {size} distinct items out of {population}")
    if size == 0 or rows == 0:
        return np.empty((rows, size), dtype=np.int64)
    if size == population:
        return np.tile(np.arange(population, dtype=np.int64), (rows, 1))
    if size * size <= 2 * population:
        chosen = _floyd_rows(rng, rows, population, size)
    else:
        chosen = _random_key_rows(rng, rows, population, size)
    chosen.sort(axis=1)
    return chosen


__all__ = ["sample_subsets"]
