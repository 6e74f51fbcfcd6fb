import numpy as np
import pytest

from kdassoc import benchgen
from kdassoc.benchgen import (CATALOG, FUNCTIONAL, RelationshipSpec, generate_relationship,
                              standardized, true_r2)
from kdassoc.table import UnknownFamilyError


def test_catalog_has_sixteen_families():
    assert len(CATALOG) == 16
    assert len(FUNCTIONAL) == 13


@pytest.mark.parametrize("family", CATALOG)
def test_generator_is_deterministic(family):
    a = generate_relationship(RelationshipSpec(family, 50, 0.3, seed=4))
    b = generate_relationship(RelationshipSpec(family, 50, 0.3, seed=4))
    assert np.array_equal(a.table.values, b.table.values)
    c = generate_relationship(RelationshipSpec(family, 50, 0.3, seed=5))
    assert not np.array_equal(a.table.values, c.table.values)


@pytest.mark.parametrize("family", list(FUNCTIONAL))
def test_standardization_holds_empirically(family):
    lo, hi = FUNCTIONAL[family].domain
    x = np.random.default_rng(0).uniform(lo, hi, 100_000)
    assert np.var(standardized(family, x)) == pytest.approx(1.0, rel=0.02)


@pytest.mark.parametrize("family", list(FUNCTIONAL))
def test_two_dim_composition_has_unit_variance(family):
    d = generate_relationship(RelationshipSpec(family, 100_000, 0.0, seed=1, x_dim=2))
    assert d.table.names == ("x1", "x2", "y")
    assert np.var(d.table.values[:, 2]) == pytest.approx(1.0, rel=0.02)


def test_true_r2_values():
    assert generate_relationship(RelationshipSpec("linear", 20, 0.0)).true_r2 == 1.0
    assert generate_relationship(RelationshipSpec("sine-period-4", 20, 1.0)).true_r2 == 0.5
    for fam in FUNCTIONAL:
        assert true_r2(fam, 0.5) == pytest.approx(1 / 1.25)
    assert true_r2("circle", 0.0) == 1.0
    assert np.isnan(true_r2("circle", 0.1))
    assert np.isnan(true_r2("checkerboard-mixture", 0.0))
    assert true_r2("gaussian-r2-0.5", 0.0) == 0.5
    assert true_r2("independent", 0.0) == 0.0


def test_true_r2_decreases_with_noise():
    noise = np.linspace(0, 3, 31)
    vals = [true_r2("cubic", s) for s in noise]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_noiseless_functional_family_is_exact():
    d = generate_relationship(RelationshipSpec("sine-period-1", 30, 0.0, seed=2))
    x, y = d.table.values.T
    np.testing.assert_allclose(y, standardized("sine-period-1", x))


def test_circle_is_on_unit_circle():
    d = generate_relationship(RelationshipSpec("circle", 40, 0.0, seed=2))
    np.testing.assert_allclose(np.hypot(*d.table.values.T), 1.0)


def test_gaussian_family_correlation():
    d = generate_relationship(RelationshipSpec("gaussian-r2-0.5", 50_000, 0.0, seed=3))
    r = np.corrcoef(d.table.values.T)[0, 1]
    assert r ** 2 == pytest.approx(0.5, abs=0.01)


@pytest.mark.parametrize("family", ["nope", "gaussian-r2-x", "gaussian-r2-1.5"])
def test_unknown_family(family):
    with pytest.raises(UnknownFamilyError):
        RelationshipSpec(family, 20)


def test_bad_specs():
    with pytest.raises(ValueError):
        RelationshipSpec("linear", 5)
    with pytest.raises(ValueError):
        RelationshipSpec("circle", 20, x_dim=2)
    with pytest.raises(ValueError):
        RelationshipSpec("linear", 20, -1.0)


def test_empty_noise_grid_gives_empty_table():
    assert benchgen.equitability_sweep(["linear"], [], 50, 2, 0) == []


def test_equitability_sweep_rows_sorted_and_formatted():
    rows = benchgen.equitability_sweep(["step", "linear"], [1.0, 0.0], 30, 2, 0)
    assert [(r["family"], r["noise_sigma"]) for r in rows] == [
        ("linear", 0.0), ("linear", 1.0), ("step", 0.0), ("step", 1.0)]
    text = benchgen.format_rows(rows, benchgen.EQUITABILITY_COLUMNS)
    lines = text.splitlines()
    assert lines[0].split("\t") == list(benchgen.EQUITABILITY_COLUMNS)
    assert len(lines) == 5
    again = benchgen.equitability_sweep(["linear", "step"], [0.0, 1.0], 30, 2, 0)
    assert rows == again


def test_convergence_sweep_requires_ascending_grid():
    with pytest.raises(ValueError):
        benchgen.convergence_sweep(["circle"], [100, 50], 1, 0)


def test_rmse_ignores_non_functional_rows():
    rows = [{"family": "linear", "true_r2": 0.5, "mean_a": 0.6},
            {"family": "circle", "true_r2": 1.0, "mean_a": 0.0}]
    assert benchgen.equitability_rmse(rows) == pytest.approx(0.1)


# step is flat on each side of its jump, so a noiseless step is not expected to reach 1
NOWHERE_FLAT = [f for f in FUNCTIONAL if f != "step"]


@pytest.mark.slow
def test_noiseless_nowhere_flat_families_score_high():
    rows = benchgen.equitability_sweep(NOWHERE_FLAT, [0.0], 400, 3, seed=11)
    low = {r["family"]: round(r["mean_a"], 3) for r in rows if r["mean_a"] < 0.9}
    assert not low
