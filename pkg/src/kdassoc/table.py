"""Observation tables, column groupings and the package's error types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class AssociationError(ValueError):
    """Base class for every data/usage error raised by kdassoc."""


class SampleTooSmallError(AssociationError):
    pass


class GroupingError(AssociationError):
    pass


class UnsupportedGroupingError(GroupingError):
    pass


class UnknownFamilyError(AssociationError):
    pass


@dataclass(frozen=True, eq=False)
class DataTable:
    """n x d block of finite observations with unique column names."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise AssociationError("values must be a 2-D array")
        names = tuple(str(s) for s in self.names)
        if len(names) != values.shape[1]:
            raise AssociationError(
                f"{len(names)} column names for {values.shape[1]} columns"
            )
        if len(set(names)) != len(names):
            raise AssociationError("column names must be unique")
        if values.shape[0] < 3:
            raise SampleTooSmallError(f"need at least 3 rows, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise AssociationError("table contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_columns(cls, columns: dict[str, Sequence[float]]) -> "DataTable":
        names = list(columns)
        cols = [np.asarray(columns[k], dtype=np.float64) for k in names]
        if len({len(c) for c in cols}) > 1:
            raise AssociationError("columns have different lengths")
        return cls(tuple(names), np.column_stack(cols))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise GroupingError(f"unknown column {name!r}") from None

    def take_rows(self, rows: np.ndarray) -> "DataTable":
        return DataTable(self.names, self.values[rows])


@dataclass(frozen=True)
class VariableGrouping:
    """k >= 2 disjoint, non-empty sets of column indices.

    Groups are stored in a canonical order (each group sorted, groups
    ordered by their smallest index), so two groupings that differ only in
    the order groups were listed compare equal and produce identical fits.
    """

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = [tuple(sorted({int(i) for i in g})) for g in self.groups]
        if len(groups) < 2:
            raise GroupingError("a grouping needs at least two groups")
        if any(len(g) == 0 for g in groups):
            raise GroupingError("groups must be non-empty")
        flat = [i for g in groups for i in g]
        if len(flat) != len(set(flat)):
            raise GroupingError("groups must be pairwise disjoint")
        if any(i < 0 for i in flat):
            raise GroupingError("column indices must be non-negative")
        object.__setattr__(self, "groups", tuple(sorted(groups)))

    @classmethod
    def of(cls, *groups: Iterable[int]) -> "VariableGrouping":
        return cls(tuple(tuple(g) for g in groups))

    @classmethod
    def parse(cls, expr: str, names: Sequence[str]) -> "VariableGrouping":
        """Parse ``"a,b|c"`` against a header into a grouping."""
        lookup = {name: i for i, name in enumerate(names)}
        groups = []
        for part in expr.split("|"):
            cols = [c.strip() for c in part.split(",") if c.strip()]
            if not cols:
                raise GroupingError(f"empty group in {expr!r}")
            missing = [c for c in cols if c not in lookup]
            if missing:
                raise GroupingError(f"unknown column(s): {', '.join(missing)}")
            groups.append(tuple(lookup[c] for c in cols))
        return cls(tuple(groups))

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(sorted(i for g in self.groups for i in g))

    def validate(self, d: int) -> None:
        """Raise GroupingError unless every index is a column of a d-column table."""
        bad = [i for i in self.columns if i >= d]
        if bad:
            raise GroupingError(f"column index out of range for {d} columns: {bad}")

    def describe(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            return "|".join(",".join(str(i) for i in g) for g in self.groups)
        return "|".join(",".join(names[i] for i in g) for g in self.groups)
