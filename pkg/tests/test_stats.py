import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bondimpute.core import Variable
from bondimpute.masking import MaskPlan
from bondimpute.stats import (
    EmptyScoreSetError,
    ResidualMissingError,
    boxplot_summary,
    mae,
    quantile,
    shapiro_coefficients,
    shapiro_wilk,
)

from conftest import make_panel

REFERENCE = json.loads((Path(__file__).parent / "data" / "shapiro_reference.json").read_text())
NA = np.nan


def scored(truth_col, completed_col, var=Variable.PRICE):
    n = len(truth_col)
    base = np.ones((n, 3))
    t, c = base.copy(), base.copy()
    t[:, var.column], c[:, var.column] = truth_col, completed_col
    plan = MaskPlan(tuple((i, var) for i in range(n)), 0, 1.0)
    return make_panel(t), make_panel(c), plan


def test_mae_perfect_and_simple():
    t, c, plan = scored([10.0, 20.0], [10.0, 20.0])
    assert mae(t, c, plan, Variable.PRICE).value == 0.0
    t, c, plan = scored([10.0, 20.0], [11.0, 17.0])
    s = mae(t, c, plan, Variable.PRICE)
    assert (s.value, s.n_cells) == (2.0, 2)


def test_mae_21_cells_direct_sum():
    rng = np.random.default_rng(21)
    truth = rng.uniform(90, 110, 21)
    err = rng.normal(0, 1, 21)
    t, c, plan = scored(truth, truth + err)
    total = 0.0
    for a, b in zip(truth, truth + err):
        total += abs(b - a)
    assert mae(t, c, plan, Variable.PRICE).value == pytest.approx(total / 21, rel=1e-14)


def test_mae_only_scores_planned_variable():
    t, c, plan = scored([1.0, 2.0], [1.5, 2.5], Variable.COUPON)
    with pytest.raises(EmptyScoreSetError):
        mae(t, c, plan, Variable.YIELD)


def test_mae_residual_missing():
    t, c, plan = scored([1.0, 2.0], [1.5, NA])
    with pytest.raises(ResidualMissingError, match=r"record 1, price"):
        mae(t, c, plan, Variable.PRICE)


@given(st.lists(st.floats(0.01, 5), min_size=1, max_size=20), st.floats(0, 3))
def test_mae_shift_and_permutation(errs, delta):
    truth = np.linspace(90, 100, len(errs))
    t, c, plan = scored(truth, truth + np.array(errs))
    base = mae(t, c, plan, Variable.PRICE).value
    t2, c2, plan2 = scored(truth, truth + np.array(errs) + delta)
    assert mae(t2, c2, plan2, Variable.PRICE).value == pytest.approx(base + delta, abs=1e-9)
    rev = MaskPlan(plan.cells[::-1], 0, 1.0)
    assert mae(t, c, rev, Variable.PRICE).value == pytest.approx(base, rel=1e-12)


def test_shapiro_exact_three_points():
    r = shapiro_wilk([1, 2, 3])
    assert abs(r.w_statistic - 1.0) <= 1e-12
    assert r.p_value == pytest.approx(1.0) and r.verdict


def test_shapiro_degenerate_and_range():
    with pytest.raises(ValueError, match="degenerate sample"):
        shapiro_wilk([5, 5, 5])
    with pytest.raises(ValueError, match="n = 2"):
        shapiro_wilk([1, 2])
    with pytest.raises(ValueError, match="n = 5001"):
        shapiro_wilk(np.arange(5001.0))


def test_shapiro_coefficients_unit_norm():
    for n in (3, 4, 5, 6, 11, 12, 100, 5000):
        a = shapiro_coefficients(n)
        assert a @ a == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(a, -a[::-1])


@pytest.mark.parametrize("case", REFERENCE["cases"], ids=lambda c: f"n{c['n']}-{c['distribution']}")
def test_shapiro_reference_table(case):
    r = shapiro_wilk(case["sample"])
    assert abs(r.w_statistic - case["w"]) <= 1e-4
    assert abs(r.p_value - case["p"]) <= 1e-3


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(-10, 10), st.integers(-1000, 1000))
def test_shapiro_affine_invariance(seed, k, b):
    # dyadic sample, power-of-two scale and integer shift: the transform itself is exact
    x = np.round(np.random.default_rng(seed).normal(size=25) * 64) / 64
    a = 2.0**k
    assert shapiro_wilk(a * x + b).w_statistic == pytest.approx(shapiro_wilk(x).w_statistic, abs=1e-12)


def test_boxplot_examples():
    b = boxplot_summary([1, 2, 3, 4, 5])
    assert (b.q1, b.median, b.q3) == (2, 3, 4)
    b = boxplot_summary([7])
    assert (b.min, b.q1, b.median, b.q3, b.max) == (7, 7, 7, 7, 7) and b.outliers == ()
    b = boxplot_summary([*range(1, 10), 100])
    assert b.outliers == (100.0,) and b.whisker_high == 9


def test_boxplot_empty():
    with pytest.raises(ValueError):
        boxplot_summary([])


def test_quantile_matches_numpy_linear():
    x = np.sort(np.random.default_rng(3).normal(size=17))
    for q in (0.1, 0.25, 0.5, 0.75, 0.9):
        assert quantile(x, q) == pytest.approx(np.quantile(x, q), abs=1e-15)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_boxplot_ordering(sample):
    b = boxplot_summary(sample)
    assert b.min <= b.whisker_low <= b.q1 <= b.median <= b.q3 <= b.whisker_high <= b.max
    iqr = b.q3 - b.q1
    assert b.whisker_high <= b.q3 + 1.5 * iqr + 1e-9 * max(1, abs(b.q3))
    assert b.whisker_low >= b.q1 - 1.5 * iqr - 1e-9 * max(1, abs(b.q1))
