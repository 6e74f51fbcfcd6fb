"""Rank transform and leave-one-out Gaussian KDE log-likelihoods.

Every column is replaced by its scaled midrank (rank / n, ties averaged).
Kernels are isotropic Gaussians: a product of one-dimensional normals that
share a single variance across all dimensions of the group they act on.

The null model scores each observation by the product of its group-wise
leave-one-out densities, all with the variance ``sigma2_I``.  The
alternative mixes that product with a leave-one-out density over all
grouped columns concatenated, with variance ``sigma2_D`` and weight ``w``.
Everything is evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .table import DataTable, VariableGrouping

SIGMA2_MIN = 1e-6
SIGMA2_MAX = 1.0

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class RankedTable:
    names: tuple[str, ...]
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ModelParams:
    sigma2_I: float
    sigma2_D: float
    w: float

    def __post_init__(self):
        for name in ("sigma2_I", "sigma2_D"):
            v = getattr(self, name)
            if not SIGMA2_MIN <= v <= SIGMA2_MAX:
                raise ValueError(f"{name}={v} outside [{SIGMA2_MIN}, {SIGMA2_MAX}]")
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"w={self.w} outside [0, 1]")


def rank_transform(table: DataTable) -> RankedTable:
    """Scaled midranks of every column; the input table is left untouched."""
    values = np.asarray(table.values, dtype=np.float64)
    n = values.shape[0]
    ranks = rankdata(values, method="average", axis=0) / n
    ranks.setflags(write=False)
    return RankedTable(tuple(table.names), ranks)


def _as_array(ranked) -> np.ndarray:
    if isinstance(ranked, RankedTable):
        return ranked.values
    arr = np.asarray(ranked, dtype=np.float64)
    return arr[:, None] if arr.ndim == 1 else arr


def squared_distances(values: np.ndarray, columns: Sequence[int]) -> np.ndarray:
    """Pairwise squared Euclidean distances over ``columns``, summed in index order."""
    cols = sorted(columns)
    out = np.zeros((values.shape[0], values.shape[0]))
    for c in cols:
        diff = values[:, c][:, None] - values[:, c][None, :]
        out += diff * diff
    return out


class LooKernel:
    """Leave-one-out log-density of one block of columns at every sample.

    The pairwise distances are shifted by each row's nearest-neighbour
    distance, so the dominant kernel term of every row is exp(0) = 1 and
    the log of the row sum never underflows, whatever the bandwidth.
    """

    def __init__(self, values: np.ndarray, columns: Sequence[int]):
        self.columns = tuple(sorted(columns))
        self.dim = len(self.columns)
        self.n = values.shape[0]
        dist = squared_distances(values, self.columns)
        np.fill_diagonal(dist, np.inf)
        self.nearest = dist.min(axis=1)
        self._shifted = dist - self.nearest[:, None]

    def log_density(self, sigma2: float) -> np.ndarray:
        scale = -0.5 / sigma2
        arg = self._shifted * scale
        # exp() is ~25x slower below -708; terms under e^-700 cannot move a
        # row sum that already holds an exact 1, so clamp (the excluded
        # diagonal at -inf included)
        np.maximum(arg, -700.0, out=arg)
        row_sums = np.exp(arg, out=arg).sum(axis=1)
        const = -0.5 * self.dim * (_LOG_2PI + math.log(sigma2)) - math.log(self.n - 1)
        return self.nearest * scale + np.log(row_sums) + const


class LooLikelihood:
    """Precomputed kernels for one (ranked table, grouping) pair.

    Building this object costs O(n^2 d); each likelihood evaluation after
    that costs O(n^2) per kernel.  The group kernels' log-density sums at
    the most recent ``sigma2_I`` values are memoised, since the fitting code
    revisits the same variance many times.
    """

    def __init__(self, ranked, grouping: VariableGrouping, cache_size: int = 64):
        values = _as_array(ranked)
        grouping.validate(values.shape[1])
        self.n = values.shape[0]
        self.grouping = grouping
        self.groups = [LooKernel(values, g) for g in grouping.groups]
        self.joint = LooKernel(values, grouping.columns)
        self._cache: dict[float, np.ndarray] = {}
        self._cache_size = cache_size

    def independent_log_density(self, sigma2_I: float) -> np.ndarray:
        """Per-sample log of the product of group-wise LOO densities."""
        key = float(sigma2_I)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        total = self.groups[0].log_density(key)
        for kern in self.groups[1:]:
            total = total + kern.log_density(key)
        if len(self._cache) >= self._cache_size:
            self._cache.pop(next(iter(self._cache)))
        self._cache[key] = total
        return total

    def null(self, sigma2_I: float) -> float:
        return float(np.sum(self.independent_log_density(sigma2_I)))

    def alt(self, sigma2_I: float, sigma2_D: float, w: float) -> float:
        if w <= 0.0:
            return self.null(sigma2_I)
        log_joint = self.joint.log_density(sigma2_D)
        if w >= 1.0:
            return float(np.sum(log_joint))
        log_indep = self.independent_log_density(sigma2_I)
        mixed = np.logaddexp(math.log(w) + log_joint, math.log1p(-w) + log_indep)
        return float(np.sum(mixed))


def loo_log_density_group(ranked, group: Sequence[int], sigma2: float) -> np.ndarray:
    """Log leave-one-out KDE of ``group``'s columns at each sample."""
    values = _as_array(ranked)
    return LooKernel(values, group).log_density(sigma2)


def loo_log_lik_null(ranked, grouping: VariableGrouping, sigma2_I: float) -> float:
    return LooLikelihood(ranked, grouping).null(sigma2_I)


def loo_log_lik_alt(ranked, grouping: VariableGrouping, params: ModelParams) -> float:
    return LooLikelihood(ranked, grouping).alt(params.sigma2_I, params.sigma2_D, params.w)
