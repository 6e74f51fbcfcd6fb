"""Non-linear semipartial association of Y with X, controlling for C."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .estimator import EstimatorConfig, FitResult, estimate_association
from .table import DataTable, GroupingError, VariableGrouping


@dataclass(frozen=True)
class SemipartialRequest:
    y_cols: tuple[int, ...]
    x_cols: tuple[int, ...]
    c_cols: tuple[int, ...]
    cfg: EstimatorConfig = field(default_factory=EstimatorConfig)

    def __post_init__(self):
        for name in ("y_cols", "x_cols", "c_cols"):
            cols = tuple(sorted(set(int(i) for i in getattr(self, name))))
            if not cols:
                raise GroupingError(f"{name} must be non-empty")
            object.__setattr__(self, name, cols)
        y, x, c = set(self.y_cols), set(self.x_cols), set(self.c_cols)
        if y & x or y & c or x & c:
            raise GroupingError("y, x and c column sets must be disjoint")

    def validate(self, d: int) -> None:
        VariableGrouping.of(self.y_cols, self.x_cols + self.c_cols).validate(d)


@dataclass(frozen=True)
class SemipartialResult:
    value: float
    full: FitResult
    reduced: FitResult

    def to_dict(self) -> dict:
        return {
            "semipartial": self.value,
            "a_full": self.full.a_corrected,
            "a_reduced": self.reduced.a_corrected,
            "n": self.full.n,
        }


def semipartial_fits(table: DataTable, req: SemipartialRequest) -> SemipartialResult:
    """A-hat(Y; X and C together) minus A-hat(Y; C), clamped to [0, 1].

    This mirrors linear semipartial R^2, which is the gain in R^2 from adding
    X to a regression of Y that already contains C.  Sampling noise can make
    the reduced fit score higher than the full one; that is reported as 0.
    """
    req.validate(table.d)
    full = estimate_association(
        table, VariableGrouping.of(req.y_cols, req.x_cols + req.c_cols), req.cfg)
    reduced = estimate_association(table, VariableGrouping.of(req.y_cols, req.c_cols), req.cfg)
    value = min(1.0, max(0.0, full.a_corrected - reduced.a_corrected))
    return SemipartialResult(value, full, reduced)


def semipartial_association(table: DataTable, req: SemipartialRequest) -> float:
    return semipartial_fits(table, req).value


def linear_semipartial_r2(cov, y: int, x: Sequence[int], c: Sequence[int]) -> float:
    """Population linear semipartial R^2 of y on x given c, from a covariance matrix."""
    cov = np.asarray(cov, dtype=float)

    def r2(pred):
        pred = list(pred)
        s_pp = cov[np.ix_(pred, pred)]
        s_py = cov[pred, y]
        return float(s_py @ np.linalg.solve(s_pp, s_py) / cov[y, y])

    return r2(list(x) + list(c)) - r2(c)
