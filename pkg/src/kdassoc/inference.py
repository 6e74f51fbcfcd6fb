"""Permutation test of independence between two variable groups."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimator import EstimatorConfig, FitResult, estimate_association
from .table import DataTable, UnsupportedGroupingError, VariableGrouping

MIN_PERMUTATIONS = 19


@dataclass(frozen=True)
class TestResult:
    fit: FitResult
    p_value: float
    b: int
    seed: int
    n_exceed: int
    n_ties: int = 0
    permuted_stats: tuple[float, ...] | None = None

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        out = {
            "fit": self.fit.to_dict(),
            "p_value": self.p_value,
            "b": self.b,
            "seed": self.seed,
            "n_exceed": self.n_exceed,
            "n_ties": self.n_ties,
        }
        if self.permuted_stats is not None:
            out["permuted_stats"] = list(self.permuted_stats)
        return out


def permuted_table(table: DataTable, grouping: VariableGrouping, seed: int,
                   replicate: int) -> DataTable:
    """Copy of ``table`` whose second group's rows are shuffled together."""
    rng = np.random.default_rng([int(seed), int(replicate)])
    perm = rng.permutation(table.n)
    values = np.array(table.values)
    cols = list(grouping.groups[1])
    values[:, cols] = values[perm][:, cols]
    return DataTable(table.names, values)


def rank_with_ties(stats, observed: float, rng: np.random.Generator) -> tuple[int, int]:
    """Count replicates ranked at or above ``observed``, splitting ties at random.

    Returns (n_exceed, n_ties): every replicate strictly above counts, and
    the observed value takes a uniformly random position among the
    replicates equal to it.  Raw A-hat is exactly 0 whenever the null point
    wins the fit, which is common under independence; counting all those
    ties as exceedances would push p-values toward 1.
    """
    greater = sum(1 for s in stats if s > observed)
    ties = sum(1 for s in stats if s == observed)
    above = int(rng.integers(0, ties + 1)) if ties else 0
    return greater + above, ties


def _replicate_stat(args) -> float:
    table, grouping, seed, r, cfg = args
    return estimate_association(permuted_table(table, grouping, seed, r), grouping, cfg).a_raw


def permutation_test(table: DataTable, grouping: VariableGrouping, b: int = 200,
                     seed: int = 0, cfg: EstimatorConfig = EstimatorConfig(),
                     keep_stats: bool = False, workers: int = 1) -> TestResult:
    """Add-one permutation p-value for the observed A-hat.

    Each replicate jointly permutes the rows of the second group (so its
    internal dependence survives), reruns the whole estimation including
    bandwidth and weight fitting, and compares raw A-hat with the observed
    raw A-hat.  Replicate r shuffles with a generator seeded by (seed, r),
    so the result is the same for any ``workers``.  Ties with the observed
    value are broken at random (see ``rank_with_ties``) with a generator
    seeded by (seed, b), which no replicate uses.

    p = (1 + n_exceed) / (b + 1), so 1 / (b + 1) <= p <= 1.
    """
    if grouping.k != 2:
        raise UnsupportedGroupingError(
            f"permutation test needs exactly 2 groups, got {grouping.k}"
        )
    if b < MIN_PERMUTATIONS:
        raise ValueError(f"b must be at least {MIN_PERMUTATIONS}")
    observed = estimate_association(table, grouping, cfg)

    jobs = [(table, grouping, seed, r, cfg) for r in range(b)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            stats = list(pool.map(_replicate_stat, jobs, chunksize=max(1, b // (4 * workers))))
    else:
        stats = [_replicate_stat(job) for job in jobs]

    exceed, ties = rank_with_ties(stats, observed.a_raw, np.random.default_rng([seed, b]))
    return TestResult(
        fit=observed,
        p_value=(1 + exceed) / (b + 1),
        b=b,
        seed=seed,
        n_exceed=exceed,
        n_ties=ties,
        permuted_stats=tuple(stats) if keep_stats else None,
    )
