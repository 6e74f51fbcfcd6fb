"""Cross-validated fitting of the null and mixture models, and the A-hat score.

A-hat is the generalized coefficient of determination built from the two
fitted leave-one-out likelihoods::

    A = 1 - prod_i (p_null(i) / p_alt(i)) ** (2 / n)
      = 1 - exp((2 / n) * (loglik_null - loglik_alt))

The mixture model contains the null as the special case w = 0, and that
point is always evaluated during fitting, so loglik_alt >= loglik_null and
A-hat is never negative.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._simplex import nelder_mead_box
from .correction import apply_small_sample_correction
from .density import SIGMA2_MAX, SIGMA2_MIN, LooLikelihood, ModelParams, rank_transform
from .table import DataTable, SampleTooSmallError, VariableGrouping

MIN_SAMPLES = 8
NULL_GRID_POINTS = 32
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class EstimatorConfig:
    apply_correction: bool = True
    tol: float = 1e-6
    max_evals: int = 500
    sigma2_min: float = SIGMA2_MIN
    sigma2_max: float = SIGMA2_MAX
    seed: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_evals < 10:
            raise ValueError("max_evals must be at least 10")
        if not SIGMA2_MIN <= self.sigma2_min < self.sigma2_max <= SIGMA2_MAX:
            raise ValueError("sigma2 bounds must nest inside the kernel limits")


@dataclass(frozen=True)
class FitResult:
    a_raw: float
    a_corrected: float
    loglik_null: float
    loglik_alt: float
    sigma2_I_null: float
    params_alt: ModelParams
    n: int
    grouping: str
    optimizer_evals: int = 0
    corrected: bool = field(default=True)

    @property
    def a_hat(self) -> float:
        return self.a_corrected

    def to_dict(self) -> dict:
        out = asdict(self)
        out["params_alt"] = asdict(self.params_alt)
        return out


def a_from_logliks(loglik_null: float, loglik_alt: float, n: int) -> float:
    """Generalized R^2 from the two log-likelihoods, computed in log space."""
    return max(0.0, float(-np.expm1((2.0 / n) * (loglik_null - loglik_alt))))


def fit_null(lik: LooLikelihood, cfg: EstimatorConfig = EstimatorConfig()):
    """Maximise the null likelihood over log sigma2_I.

    A log-uniform grid scan locates the basin, golden-section search refines
    it between the best grid point's neighbours.  Returns the best evaluated
    (sigma2_I, loglik, n_evals).
    """
    lo, hi = np.log(cfg.sigma2_min), np.log(cfg.sigma2_max)
    grid = np.linspace(lo, hi, NULL_GRID_POINTS)
    evaluated: dict[float, float] = {}

    def loglik(t: float) -> float:
        if t not in evaluated:
            evaluated[t] = lik.null(float(np.exp(t)))
        return evaluated[t]

    scores = [loglik(t) for t in grid]
    i = int(np.argmax(scores))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = loglik(c), loglik(d)
    while b - a > 1e-4:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = loglik(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = loglik(d)

    # max() keeps the first maximiser, and dict order is evaluation order
    t_best = max(evaluated, key=evaluated.__getitem__)
    sigma2 = float(np.exp(t_best)) if t_best not in (lo, hi) else (
        cfg.sigma2_min if t_best == lo else cfg.sigma2_max)
    return sigma2, lik.null(sigma2), len(evaluated)


def fit_alt(lik: LooLikelihood, null_fit, cfg: EstimatorConfig = EstimatorConfig()):
    """Maximise the mixture likelihood over (sigma2_I, sigma2_D, w).

    Three simplex searches in (log sigma2_I, log sigma2_D, w) start from a
    mostly-dependent point, a half-mixed point with a narrower joint kernel,
    and the null point itself.  Returns (ModelParams, loglik, n_evals) for the
    best point seen; loglik is never below the null fit's.
    """
    sigma2_null, loglik_null = null_fit[0], null_fit[1]
    lo = np.log(cfg.sigma2_min)
    hi = np.log(cfg.sigma2_max)
    lower = np.array([lo, lo, 0.0])
    upper = np.array([hi, hi, 1.0])
    t = float(np.log(sigma2_null))
    starts = [
        (t, t, 0.99),
        (t, max(t - np.log(4.0), lo), 0.5),
        (t, t, 0.0),
    ]

    s_min, s_max = cfg.sigma2_min, cfg.sigma2_max

    def unpack(x) -> tuple[float, float, float]:
        s_i = min(max(math.exp(x[0]), s_min), s_max)
        s_d = min(max(math.exp(x[1]), s_min), s_max)
        return s_i, s_d, float(x[2])

    def params_at(x) -> ModelParams:
        return ModelParams(*unpack(x))

    def objective(x) -> float:
        # called a few hundred times per fit; skip ModelParams validation here
        return -lik.alt(*unpack(x))

    best_params = ModelParams(sigma2_null, sigma2_null, 0.0)
    best = lik.alt(sigma2_null, sigma2_null, 0.0)
    total_evals = 1
    for x0 in starts:
        x, fx, evals = nelder_mead_box(
            objective, x0, (0.7, 0.7, 0.25), lower, upper,
            rtol=cfg.tol, max_evals=cfg.max_evals,
        )
        total_evals += evals
        if -fx > best:
            best, best_params = -fx, params_at(x)
    assert best >= loglik_null
    return best_params, best, total_evals


def estimate_association(table: DataTable, grouping: VariableGrouping,
                         cfg: EstimatorConfig = EstimatorConfig()) -> FitResult:
    """Rank, fit both models, and score the association between groups."""
    grouping.validate(table.d)
    if table.n < MIN_SAMPLES:
        raise SampleTooSmallError(
            f"need at least {MIN_SAMPLES} complete rows, got {table.n}"
        )
    lik = LooLikelihood(rank_transform(table), grouping)
    return fit_likelihood(lik, cfg, names=table.names)


def fit_likelihood(lik: LooLikelihood, cfg: EstimatorConfig = EstimatorConfig(),
                   names=None) -> FitResult:
    sigma2_null, loglik_null, null_evals = fit_null(lik, cfg)
    params, loglik_alt, alt_evals = fit_alt(lik, (sigma2_null, loglik_null), cfg)
    a_raw = a_from_logliks(loglik_null, loglik_alt, lik.n)
    if cfg.apply_correction:
        a_corr = apply_small_sample_correction(a_raw, lik.n, lik.joint.dim)
    else:
        a_corr = a_raw
    return FitResult(
        a_raw=a_raw,
        a_corrected=a_corr,
        loglik_null=loglik_null,
        loglik_alt=loglik_alt,
        sigma2_I_null=sigma2_null,
        params_alt=params,
        n=lik.n,
        grouping=lik.grouping.describe(names),
        optimizer_evals=null_evals + alt_evals,
        corrected=cfg.apply_correction,
    )
