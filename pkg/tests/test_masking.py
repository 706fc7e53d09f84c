import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bondimpute.core import MaskConfig, Variable, missing_fraction
from bondimpute.masking import IncompleteDatasetError, MaskPlan, apply_mask, plan_mcar, read_plan, target_count, write_plan

from conftest import make_panel


def complete(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    return make_panel(np.column_stack([rng.uniform(1, 10, n), rng.uniform(90, 110, n), rng.uniform(1, 10, n)]))


def test_zero_and_full_rate():
    d = complete(20)
    assert plan_mcar(d, MaskConfig(0.0, 1)).cells == ()
    full = plan_mcar(d, MaskConfig(1.0, 1))
    assert len(full) == 60
    masked, truth = apply_mask(d, full)
    assert missing_fraction(masked) == 1.0 and truth is d


def test_twenty_records_hide_21_cells():
    plan = plan_mcar(complete(20), MaskConfig(0.35, 9))
    assert len(plan) == 21
    assert len(set(plan.cells)) == 21


def test_half_rounds_up():
    # 0.35 * 30 = 10.5 in decimal arithmetic
    assert target_count(0.35, 30) == 11
    assert target_count(0.35, 60) == 21


def test_rejects_incomplete_and_bad_rate():
    d = make_panel([[1.0, np.nan, 2.0]] + [[1.0, 100.0, 2.0]] * 0)
    with pytest.raises(IncompleteDatasetError, match="dataset not complete"):
        plan_mcar(d, MaskConfig(0.35, 1))
    with pytest.raises(ValueError):
        plan_mcar(complete(5), MaskConfig(1.2, 1))


def test_per_variable_targets_only_touch_that_variable():
    d = make_panel([[1.0, np.nan, 2.0], [1.0, np.nan, 2.0], [1.0, 100.0, 3.0]])
    plan = plan_mcar(d, MaskConfig(0.5, 4, targets={"coupon"}))
    assert len(plan) == 2 and all(v is Variable.COUPON for _, v in plan.cells)


def test_whole_row_mode():
    plan = plan_mcar(complete(10), MaskConfig(0.3, 2, targets={"row"}))
    rows = {i for i, _ in plan.cells}
    assert len(rows) == 3 and len(plan) == 9


def test_apply_single_cell():
    d = complete(5)
    masked, truth = apply_mask(d, MaskPlan(((2, Variable.YIELD),), 0, 0.0))
    assert (masked.mask != d.mask).sum() == 1
    assert masked.records[2].yield_ is None
    assert masked.records[2].price == d.records[2].price


def test_apply_empty_plan_is_identity():
    d = complete(5)
    masked, truth = apply_mask(d, MaskPlan((), 0, 0.0))
    assert masked == d == truth


def test_apply_rejects_absent_cells():
    d = complete(3)
    with pytest.raises(IndexError):
        apply_mask(d, MaskPlan(((7, Variable.PRICE),), 0, 0.0))
    masked, _ = apply_mask(d, MaskPlan(((0, Variable.PRICE),), 0, 0.0))
    with pytest.raises(ValueError, match="record 0"):
        apply_mask(masked, MaskPlan(((0, Variable.PRICE),), 0, 0.0))


def test_plan_determinism_and_csv(tmp_path):
    d = complete(40)
    a = plan_mcar(d, MaskConfig(0.35, 123))
    assert a == plan_mcar(d, MaskConfig(0.35, 123))
    write_plan(a, tmp_path / "p.csv")
    assert read_plan(tmp_path / "p.csv", 123, 0.35) == a


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.floats(0, 1), st.integers(0, 2**64 - 1))
def test_exact_count_property(n, rate, seed):
    d = complete(n)
    plan = plan_mcar(d, MaskConfig(rate, seed))
    assert len(plan) == target_count(rate, 3 * n)
    assert len(set(plan.cells)) == len(plan)


def test_distinct_seeds_give_distinct_plans():
    d = complete(10)  # 30 cells
    rng = np.random.default_rng(5)
    seeds = rng.integers(0, 2**63, size=(1000, 2))
    collisions = sum(plan_mcar(d, MaskConfig(0.35, int(a))) .cells == plan_mcar(d, MaskConfig(0.35, int(b))).cells for a, b in seeds)
    assert collisions == 0
