"""Small-sample correction for A-hat, calibrated on Gaussian samples.

Leave-one-out KDE fits shrink A-hat toward zero at small n, and the shrinkage
grows with the dimension D of the joint kernel (the total number of grouped
columns).  For a Gaussian Y that is linear in D - 1 independent Gaussian
predictors the target is known (A equals the population R^2), so the
correction is read off simulation: for each (D, n) in the grid the table
stores the mean raw A-hat at each true R^2, and a raw value is mapped back to
the true R^2 whose mean it matches by piecewise-linear, monotone
interpolation.  Rows are anchored at (0, 0) and (1, 1).

Lookup rules: D outside the calibrated range uses the nearest calibrated D.
Between tabulated sample sizes the two neighbouring rows' corrections are
blended linearly in n; below the smallest n the first row is used; above the
largest n the correction is the identity.

Table file format (plain text, UTF-8)::

    # kdassoc-correction-table
    # format_version: 2
    # seed: <int>
    # replicates: <int>
    # dim_grid: <comma separated ints>
    # n_grid: <comma separated ints>
    # r2_grid: <comma separated floats>
    dim<TAB>n<TAB>r2<TAB>mean_raw<TAB>sd_raw<TAB>replicates
    <one row per (dim, n, r2) cell, dim-major, all ascending>

Floats are written with ``repr`` so a save/load round trip is lossless.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

FORMAT_VERSION = 2
HEADER_MAGIC = "# kdassoc-correction-table"
COLUMNS = ("dim", "n", "r2", "mean_raw", "sd_raw", "replicates")
DEFAULT_DIM_GRID = (2, 3, 4)
DEFAULT_N_GRID = (20, 50, 100, 200, 400)
DEFAULT_R2_GRID = tuple(round(0.1 * i, 1) for i in range(10))
DEFAULT_SEED = 20121015
DEFAULT_REPLICATES = 200


@dataclass(frozen=True, eq=False)
class CorrectionTable:
    dim_grid: tuple[int, ...]
    n_grid: tuple[int, ...]
    r2_grid: tuple[float, ...]
    mean_raw: np.ndarray  # shape (len(dim_grid), len(n_grid), len(r2_grid))
    sd_raw: np.ndarray
    replicates: int
    seed: int

    def __post_init__(self):
        shape = (len(self.dim_grid), len(self.n_grid), len(self.r2_grid))
        if np.shape(self.mean_raw) != shape or np.shape(self.sd_raw) != shape:
            raise ValueError(f"table arrays must have shape {shape}")
        if list(self.dim_grid) != sorted(set(self.dim_grid)) or self.dim_grid[0] < 2:
            raise ValueError("dim_grid must be strictly ascending and start at 2 or more")
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise ValueError("n_grid must be strictly ascending")
        if list(self.r2_grid) != sorted(set(self.r2_grid)):
            raise ValueError("r2_grid must be strictly ascending")

    def _row_knots(self, plane: int, row: int):
        raw = np.concatenate([[0.0], self.mean_raw[plane, row], [1.0]])
        raw = np.clip(np.maximum.accumulate(raw), 0.0, 1.0)
        true = np.concatenate([[0.0], self.r2_grid, [1.0]])
        return raw, true

    def _apply_row(self, a_raw: float, plane: int, row: int) -> float:
        raw, true = self._row_knots(plane, row)
        # np.interp needs increasing knots; where raw means tie, keep the
        # largest target so the map stays a function of a_raw
        keep = np.append(raw[1:] > raw[:-1], True)
        return float(np.interp(a_raw, raw[keep], true[keep]))

    def plane_for(self, dim: int) -> int:
        """Index of the calibrated dimension used for a joint kernel of size dim."""
        dims = self.dim_grid
        if dim <= dims[0]:
            return 0
        if dim >= dims[-1]:
            return len(dims) - 1
        # between calibrated dimensions, use the next one up
        return int(np.searchsorted(dims, dim))

    def apply(self, a_raw: float, n: int, dim: int = 2) -> float:
        if a_raw <= 0.0:
            return 0.0
        ns = self.n_grid
        if n > ns[-1]:
            return float(min(a_raw, 1.0))
        k = self.plane_for(dim)
        if n <= ns[0]:
            out = self._apply_row(a_raw, k, 0)
        else:
            j = int(np.searchsorted(ns, n))
            if ns[j] == n:
                out = self._apply_row(a_raw, k, j)
            else:
                frac = (n - ns[j - 1]) / (ns[j] - ns[j - 1])
                out = (1.0 - frac) * self._apply_row(a_raw, k, j - 1) \
                    + frac * self._apply_row(a_raw, k, j)
        return float(min(max(out, 0.0), 1.0))

    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write(HEADER_MAGIC + "\n")
        buf.write(f"# format_version: {FORMAT_VERSION}\n")
        buf.write(f"# seed: {self.seed}\n")
        buf.write(f"# replicates: {self.replicates}\n")
        buf.write("# dim_grid: " + ",".join(str(d) for d in self.dim_grid) + "\n")
        buf.write("# n_grid: " + ",".join(str(n) for n in self.n_grid) + "\n")
        buf.write("# r2_grid: " + ",".join(repr(float(r)) for r in self.r2_grid) + "\n")
        buf.write("\t".join(COLUMNS) + "\n")
        for k, dim in enumerate(self.dim_grid):
            for i, n in enumerate(self.n_grid):
                for j, r2 in enumerate(self.r2_grid):
                    buf.write(
                        f"{dim}\t{n}\t{float(r2)!r}\t{float(self.mean_raw[k, i, j])!r}\t"
                        f"{float(self.sd_raw[k, i, j])!r}\t{self.replicates}\n"
                    )
        return buf.getvalue()

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "CorrectionTable":
        lines = text.splitlines()
        if not lines or lines[0].strip() != HEADER_MAGIC:
            raise ValueError("not a correction table")
        meta = {}
        body = []
        for line in lines[1:]:
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
            elif line.strip():
                body.append(line.split("\t"))
        if int(meta.get("format_version", -1)) != FORMAT_VERSION:
            raise ValueError(f"unsupported format_version {meta.get('format_version')}")
        if not body or tuple(body[0]) != COLUMNS:
            raise ValueError("missing or malformed column header")
        dim_grid = tuple(int(v) for v in meta["dim_grid"].split(","))
        n_grid = tuple(int(v) for v in meta["n_grid"].split(","))
        r2_grid = tuple(float(v) for v in meta["r2_grid"].split(","))
        mean = np.full((len(dim_grid), len(n_grid), len(r2_grid)), np.nan)
        sd = np.full_like(mean, np.nan)
        for row in body[1:]:
            k = dim_grid.index(int(row[0]))
            i = n_grid.index(int(row[1]))
            j = r2_grid.index(float(row[2]))
            mean[k, i, j] = float(row[3])
            sd[k, i, j] = float(row[4])
        if np.isnan(mean).any():
            raise ValueError("correction table is missing cells")
        return cls(dim_grid, n_grid, r2_grid, mean, sd, int(meta["replicates"]),
                   int(meta["seed"]))

    @classmethod
    def load(cls, path) -> "CorrectionTable":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def default_table() -> CorrectionTable | None:
    try:
        text = resources.files("kdassoc").joinpath("data/correction_table.tsv").read_text(
            encoding="utf-8"
        )
    except FileNotFoundError:
        log.warning("no shipped correction table; correction is the identity")
        return None
    return CorrectionTable.loads(text)


def apply_small_sample_correction(a_raw: float, n: int, dim: int = 2,
                                  table: CorrectionTable | None = None) -> float:
    """Map a raw A-hat at sample size n and joint dimension dim onto the calibrated scale."""
    table = table if table is not None else default_table()
    if table is None:
        return float(min(max(a_raw, 0.0), 1.0))
    return table.apply(a_raw, n, dim)


def _calibration_cell(args):
    from .benchgen import gaussian_table
    from .estimator import EstimatorConfig, estimate_association
    from .table import VariableGrouping

    dim, n, r2, seed, replicates = args
    cfg = EstimatorConfig(apply_correction=False)
    grouping = VariableGrouping.of(range(dim - 1), [dim - 1])
    values = []
    for rep in range(replicates):
        rng = np.random.default_rng([seed, dim, n, int(round(r2 * 1_000_000)), rep])
        table = gaussian_table(n, r2, rng, dim=dim)
        values.append(estimate_association(table, grouping, cfg).a_raw)
    return float(np.mean(values)), float(np.std(values, ddof=1))


def calibrate_correction(n_grid=DEFAULT_N_GRID, r2_grid=DEFAULT_R2_GRID,
                         replicates: int = DEFAULT_REPLICATES, seed: int = DEFAULT_SEED,
                         workers: int = 1, dim_grid=DEFAULT_DIM_GRID) -> CorrectionTable:
    """Simulate Gaussian samples on the grid and tabulate mean raw A-hat.

    Each replicate draws from its own generator seeded by
    (seed, dim, n, r2, replicate), so the table does not depend on ``workers``.
    """
    if replicates < 2:
        raise ValueError("need at least 2 replicates per cell")
    cells = [(int(d), int(n), float(r2), int(seed), int(replicates))
             for d in dim_grid for n in n_grid for r2 in r2_grid]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_calibration_cell, cells))
    else:
        results = []
        for cell in cells:
            results.append(_calibration_cell(cell))
            log.info("calibrated dim=%d n=%d r2=%.2f mean=%.4f", cell[0], cell[1], cell[2],
                     results[-1][0])
    shape = (len(dim_grid), len(n_grid), len(r2_grid))
    mean = np.array([r[0] for r in results]).reshape(shape)
    sd = np.array([r[1] for r in results]).reshape(shape)
    return CorrectionTable(tuple(int(d) for d in dim_grid), tuple(int(n) for n in n_grid),
                           tuple(float(r) for r in r2_grid), mean, sd, int(replicates), int(seed))
