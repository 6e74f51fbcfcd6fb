"""Synthetic relationships with known R^2, and the sweeps built on them.

Functional families draw x uniformly on their domain and return
y = f(x) + N(0, noise_sigma^2), where f is shifted and scaled so that
E[f(X)] = 0 and Var(f(X)) = 1.  Their true R^2 is therefore
1 / (1 + noise_sigma^2).  The standardising moments are computed by a
2^20-point midpoint rule over the domain the first time a family is used.

With ``x_dim=2`` a functional family draws x1, x2 independently from its
domain and uses f2(x1, x2) = (f(x1) + f(x2)) / sqrt(2), which again has
mean 0 and variance 1, so the same R^2 formula holds.

Non-functional families (circle, cross, checkerboard-mixture) have no
regression function.  Circle and cross report true R^2 = 1 when noiseless
and NaN otherwise; checkerboard-mixture always reports NaN.  They are
only available with ``x_dim=1``.

Two more families serve the convergence sweep: ``gaussian-r2-<v>`` is a
bivariate normal with squared correlation v (true R^2 = v), and
``independent`` is a pair of independent uniforms (true R^2 = 0).
"""

from __future__ import annotations

import io
import zlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .estimator import EstimatorConfig, estimate_association
from .table import DataTable, UnknownFamilyError, VariableGrouping


@dataclass(frozen=True)
class _Family:
    f: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]
    doc: str


def _piecewise(x):
    return np.where(x < 0.6, x, 0.6 - 1.5 * (x - 0.6))


FUNCTIONAL: dict[str, _Family] = {
    "linear": _Family(lambda x: x, (0.0, 1.0), "x"),
    "quadratic": _Family(lambda x: (x - 0.5) ** 2, (0.0, 1.0), "(x - 1/2)^2"),
    "cubic": _Family(lambda x: (2 * x - 1) ** 3 - 0.5 * (2 * x - 1), (0.0, 1.0),
                     "u^3 - u/2, u = 2x - 1"),
    "sine-period-1": _Family(lambda x: np.sin(2 * np.pi * x), (0.0, 1.0), "sin(2 pi x)"),
    "sine-period-4": _Family(lambda x: np.sin(8 * np.pi * x), (0.0, 1.0), "sin(8 pi x)"),
    "exponential-growth": _Family(lambda x: np.exp(3 * x), (0.0, 1.0), "exp(3x)"),
    "logarithm": _Family(lambda x: np.log(x), (0.05, 1.0), "log(x)"),
    "square-root": _Family(np.sqrt, (0.0, 1.0), "sqrt(x)"),
    "step": _Family(lambda x: (x > 0.5).astype(float), (0.0, 1.0), "1[x > 1/2]"),
    "sigmoid": _Family(lambda x: 1.0 / (1.0 + np.exp(-10 * (x - 0.5))), (0.0, 1.0),
                       "1 / (1 + exp(-10 (x - 1/2)))"),
    "absolute-value": _Family(lambda x: np.abs(x - 0.5), (0.0, 1.0), "|x - 1/2|"),
    "sawtooth": _Family(lambda x: np.mod(3 * x, 1.0), (0.0, 1.0), "frac(3x)"),
    "piecewise-linear": _Family(_piecewise, (0.0, 1.0),
                                "x below 0.6, then slope -1.5"),
}
NON_FUNCTIONAL = ("cross", "circle", "checkerboard-mixture")
CATALOG = tuple(FUNCTIONAL) + NON_FUNCTIONAL
CONVERGENCE_FAMILIES = ("circle", "gaussian-r2-0.5", "independent")


@lru_cache(maxsize=None)
def standardization(family: str) -> tuple[float, float]:
    """(mean, sd) of f(X) for X uniform on the family's domain."""
    fam = FUNCTIONAL[family]
    lo, hi = fam.domain
    m = 1 << 20
    x = lo + (hi - lo) * (np.arange(m) + 0.5) / m
    fx = fam.f(x)
    mean = float(fx.mean())
    return mean, float(np.sqrt(np.mean((fx - mean) ** 2)))


def standardized(family: str, x: np.ndarray) -> np.ndarray:
    mean, sd = standardization(family)
    return (FUNCTIONAL[family].f(x) - mean) / sd


def true_r2_for_noise(noise_sigma: float) -> float:
    return 1.0 / (1.0 + noise_sigma ** 2)


def noise_for_r2(r2: float) -> float:
    return float(np.sqrt(1.0 / r2 - 1.0))


def _gaussian_r2(family: str) -> float | None:
    if not family.startswith("gaussian-r2-"):
        return None
    try:
        r2 = float(family[len("gaussian-r2-"):])
    except ValueError:
        raise UnknownFamilyError(f"bad gaussian family {family!r}") from None
    if not 0.0 <= r2 < 1.0:
        raise UnknownFamilyError(f"gaussian R^2 must lie in [0, 1): {family!r}")
    return r2


def true_r2(family: str, noise_sigma: float) -> float:
    """Population R^2 of a family at a noise level (NaN where undefined)."""
    check_family(family)
    if family in FUNCTIONAL:
        return true_r2_for_noise(noise_sigma)
    if family in ("circle", "cross"):
        return 1.0 if noise_sigma == 0 else float("nan")
    if family == "independent":
        return 0.0
    r2 = _gaussian_r2(family)
    return float("nan") if r2 is None else r2


def is_functional(family: str) -> bool:
    return family in FUNCTIONAL


def check_family(family: str) -> None:
    if family in CATALOG or family == "independent" or _gaussian_r2(family) is not None:
        return
    raise UnknownFamilyError(f"unknown family {family!r}")


@dataclass(frozen=True)
class RelationshipSpec:
    family: str
    n: int
    noise_sigma: float = 0.0
    seed: int = 0
    x_dim: int = 1

    def __post_init__(self):
        check_family(self.family)
        if self.n < 8:
            raise ValueError("n must be at least 8")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.x_dim not in (1, 2):
            raise ValueError("x_dim must be 1 or 2")
        if self.x_dim == 2 and not is_functional(self.family):
            raise ValueError(f"x_dim=2 needs a functional family, got {self.family!r}")


@dataclass(frozen=True, eq=False)
class GeneratedData:
    table: DataTable
    true_r2: float
    spec: RelationshipSpec

    @property
    def grouping(self) -> VariableGrouping:
        return VariableGrouping.of(range(self.table.d - 1), [self.table.d - 1])


def gaussian_table(n: int, r2: float, rng: np.random.Generator, dim: int = 2) -> DataTable:
    """Standard normal sample whose last column has population R^2 = r2 on the others.

    The first dim - 1 columns are independent N(0, 1) predictors with equal
    weights; with dim = 2 this is a bivariate normal with correlation sqrt(r2).
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    z = rng.standard_normal((n, dim))
    x = z[:, :dim - 1]
    y = np.sqrt(r2 / (dim - 1)) * x.sum(axis=1) + np.sqrt(1.0 - r2) * z[:, dim - 1]
    names = ("x", "y") if dim == 2 else tuple(f"x{i + 1}" for i in range(dim - 1)) + ("y",)
    return DataTable(names, np.column_stack([x, y]))


def generate_relationship(spec: RelationshipSpec) -> GeneratedData:
    rng = np.random.default_rng(spec.seed)
    n, s = spec.n, spec.noise_sigma
    fam = spec.family

    if fam in FUNCTIONAL:
        lo, hi = FUNCTIONAL[fam].domain
        if spec.x_dim == 1:
            x = rng.uniform(lo, hi, n)
            fx = standardized(fam, x)
            cols, names = [x], ("x",)
        else:
            x = rng.uniform(lo, hi, (n, 2))
            fx = (standardized(fam, x[:, 0]) + standardized(fam, x[:, 1])) / np.sqrt(2.0)
            cols, names = [x[:, 0], x[:, 1]], ("x1", "x2")
        y = fx + s * rng.standard_normal(n)
        table = DataTable(names + ("y",), np.column_stack(cols + [y]))
        return GeneratedData(table, true_r2(fam, s), spec)

    if fam == "circle":
        theta = rng.uniform(0.0, 2.0 * np.pi, n)
        r = 1.0 + s * rng.standard_normal(n)
        x, y = r * np.cos(theta), r * np.sin(theta)
    elif fam == "cross":
        x = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), n)
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        y = sign * x + s * rng.standard_normal(n)
    elif fam == "checkerboard-mixture":
        # 4x4 board: y falls in a row whose parity matches x's column
        x = rng.uniform(0.0, 1.0, n)
        col = np.floor(4 * x).astype(int)
        row = 2 * rng.integers(0, 2, n) + (col % 2)
        y = (row + rng.random(n)) / 4 + s * rng.standard_normal(n)
    elif fam == "independent":
        x, y = rng.random(n), rng.random(n)
    else:
        t = gaussian_table(n, _gaussian_r2(fam), rng)
        return GeneratedData(t, true_r2(fam, s), spec)

    table = DataTable(("x", "y"), np.column_stack([x, y]))
    return GeneratedData(table, true_r2(fam, s), spec)


def _cell_seed(seed: int, *parts) -> int:
    entropy = [int(seed)] + [p if isinstance(p, int) else zlib.crc32(str(p).encode())
                             for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def _score(spec: RelationshipSpec, cfg: EstimatorConfig) -> float:
    data = generate_relationship(spec)
    return estimate_association(data.table, data.grouping, cfg).a_corrected


def equitability_sweep(families: Iterable[str], noise_grid: Sequence[float], n: int,
                       replicates: int, seed: int, x_dim: int = 1,
                       cfg: EstimatorConfig = EstimatorConfig()) -> list[dict]:
    """Mean and sd of A-hat per (family, noise level); rows sorted by both."""
    if n < 8:
        raise ValueError("n must be at least 8")
    rows = []
    for fam in sorted(set(families)):
        check_family(fam)
        for noise in sorted(set(float(v) for v in noise_grid)):
            scores = []
            for rep in range(replicates):
                spec = RelationshipSpec(fam, n, noise, _cell_seed(seed, fam, repr(noise), rep),
                                        x_dim)
                scores.append(_score(spec, cfg))
            rows.append({
                "family": fam, "x_dim": x_dim, "noise_sigma": noise, "n": n,
                "replicates": replicates, "true_r2": true_r2(fam, noise),
                "mean_a": float(np.mean(scores)),
                "sd_a": float(np.std(scores, ddof=1)) if replicates > 1 else 0.0,
            })
    return rows


def convergence_sweep(families: Iterable[str] = CONVERGENCE_FAMILIES,
                      n_grid: Sequence[int] = (50, 100, 200, 400), replicates: int = 10,
                      seed: int = 0, cfg: EstimatorConfig = EstimatorConfig()) -> list[dict]:
    """Mean A-hat per (family, n); rows sorted by family then n."""
    n_grid = [int(v) for v in n_grid]
    if n_grid != sorted(n_grid):
        raise ValueError("n grid must be ascending")
    rows = []
    for fam in sorted(set(families)):
        check_family(fam)
        for n in n_grid:
            scores = [_score(RelationshipSpec(fam, n, 0.0, _cell_seed(seed, fam, n, rep)), cfg)
                      for rep in range(replicates)]
            rows.append({
                "family": fam, "n": n, "replicates": replicates,
                "mean_a": float(np.mean(scores)),
                "sd_a": float(np.std(scores, ddof=1)) if replicates > 1 else 0.0,
            })
    return rows


EQUITABILITY_COLUMNS = ("family", "x_dim", "noise_sigma", "n", "replicates", "true_r2",
                        "mean_a", "sd_a")
CONVERGENCE_COLUMNS = ("family", "n", "replicates", "mean_a", "sd_a")


def format_rows(rows: Sequence[dict], columns: Sequence[str]) -> str:
    """Tab-separated text: one header line, then one line per row."""
    buf = io.StringIO()
    buf.write("\t".join(columns) + "\n")
    for row in rows:
        cells = []
        for c in columns:
            v = row[c]
            cells.append(f"{v:.6f}" if isinstance(v, float) else str(v))
        buf.write("\t".join(cells) + "\n")
    return buf.getvalue()


def equitability_rmse(rows: Sequence[dict]) -> float:
    """RMSE of mean A-hat against true R^2 over the functional-family rows."""
    err = [r["mean_a"] - r["true_r2"] for r in rows if is_functional(r["family"])]
    if not err:
        return float("nan")
    return float(np.sqrt(np.mean(np.square(err))))
