"""The Hald cement data (13 observations, 4 predictors)."""
from __future__ import annotations

import itertools

import numpy as np

from .core import Dataset, ModelSpec
from .exceptions import InvalidInputError

NAMES = ("X1", "X2", "X3", "X4")

_RAW = np.array([
    [7, 26, 6, 60, 78.5],
    [1, 29, 15, 52, 74.3],
    [11, 56, 8, 20, 104.3],
    [11, 31, 8, 47, 87.6],
    [7, 52, 6, 33, 95.9],
    [11, 55, 9, 22, 109.2],
    [3, 71, 17, 6, 102.7],
    [1, 31, 22, 44, 72.5],
    [2, 54, 18, 22, 93.1],
    [21, 47, 4, 26, 115.9],
    [1, 40, 23, 34, 83.8],
    [11, 66, 9, 12, 113.3],
    [10, 68, 8, 12, 109.4],
])

HALD_CSV = "X1,X2,X3,X4,Y\n" + "".join(
    ",".join(f"{v:g}" for v in row) + "\n" for row in _RAW)


def load_hald() -> Dataset:
    """Heat evolved (``y``) against the four clinker ingredients (``X``, in percent)."""
    return Dataset(_RAW[:, 4], _RAW[:, :4])


def all_subsets(n_predictors: int, min_size: int = 1, max_predictors: int = 20) -> list:
    """Every intercept model with at least ``min_size`` predictors, smaller models first."""
    if n_predictors > max_predictors:
        raise InvalidInputError(
            f"all-subsets enumeration is capped at {max_predictors} predictors, got {n_predictors}")
    if not 0 <= min_size <= n_predictors:
        raise InvalidInputError(f"min_size must lie in [0, {n_predictors}]")
    return [ModelSpec(c)
            for k in range(min_size, n_predictors + 1)
            for c in itertools.combinations(range(n_predictors), k)]


def hald_candidates() -> list:
    """The eleven models with at least two ingredients, in the usual display order."""
    return all_subsets(4, min_size=2)
