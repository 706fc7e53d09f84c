from datetime import date

import numpy as np
import pytest

from bondimpute.core import AuctionRecord, Dataset, Maturity
from bondimpute.curve import (
    ArbitrageError,
    CurveInstrument,
    IncompleteSeriesError,
    bootstrap,
    instruments_from_dataset,
    price_bond,
    repricing_errors,
    write_curve,
)
from bondimpute.synth import synthetic_panel


def test_one_year_par_bond():
    c = bootstrap([CurveInstrument(1.0, 10.0, 100.0)])
    assert c.points[0].discount_factor == pytest.approx(0.909091, abs=1e-6)
    assert c.points[0].zero_rate == 10.0


def test_bill():
    c = bootstrap([CurveInstrument(0.5, 0.0, 95.0)])
    assert c.points[0].discount_factor == 0.95
    assert c.points[0].zero_rate == pytest.approx(100 * (95 ** -1 * 100) ** 2 - 100, rel=1e-12)
    one_year = bootstrap([CurveInstrument(1.0, 0.0, 95.0)])
    assert one_year.points[0].zero_rate == pytest.approx(5.263158, abs=1e-6)


def test_two_year_par_curve():
    c = bootstrap([CurveInstrument(1.0, 10.0, 100.0), CurveInstrument(2.0, 10.0, 100.0)])
    assert c.points[1].discount_factor == pytest.approx(0.826446, abs=1e-6)
    assert c.points[1].zero_rate == pytest.approx(10.0, abs=1e-10)


def test_matches_discounted_cash_flows():
    dfs = [0.96, 0.915, 0.87, 0.82]
    insts = []
    for n, c in zip(range(1, 5), (3.0, 4.0, 4.5, 5.0)):
        price = sum(c * dfs[k] for k in range(n)) + 100 * dfs[n - 1]
        insts.append(CurveInstrument(float(n), c, price))
    curve = bootstrap(insts)
    np.testing.assert_allclose([p.discount_factor for p in curve.points], dfs, rtol=1e-13)
    assert max(repricing_errors(curve, insts)) < 1e-12


def test_missing_tenor():
    with pytest.raises(IncompleteSeriesError, match="missing 2y"):
        bootstrap([CurveInstrument(1.0, 5.0, 100.0), CurveInstrument(3.0, 5.0, 100.0)])
    with pytest.raises(IncompleteSeriesError, match="price missing"):
        bootstrap([CurveInstrument(1.0, 5.0, float("nan"))])
    with pytest.raises(IncompleteSeriesError):
        bootstrap([])


def test_arbitrage():
    with pytest.raises(ArbitrageError, match="non-positive"):
        bootstrap([CurveInstrument(1.0, 5.0, 100.0), CurveInstrument(2.0, 1.0, 0.5)])
    with pytest.raises(ArbitrageError, match="does not decrease"):
        bootstrap([CurveInstrument(1.0, 5.0, 100.0), CurveInstrument(2.0, 5.0, 120.0)])


def test_unsorted_rejected():
    with pytest.raises(ValueError, match="sorted"):
        bootstrap([CurveInstrument(2.0, 5.0, 100.0), CurveInstrument(1.0, 5.0, 100.0)])


def test_off_grid_pricing():
    c = bootstrap([CurveInstrument(1.0, 5.0, 100.0)])
    with pytest.raises(ValueError, match="off"):
        price_bond(c, 5.0, 1.5)
    with pytest.raises(ValueError, match="off the curve grid"):
        price_bond(c, 5.0, 2.0)


def test_synthetic_cross_sections_bootstrap(tmp_path):
    d = synthetic_panel(120, 5)
    for day in d.dates():
        insts = instruments_from_dataset(d.cross_section(day))
        curve = bootstrap(insts)
        # prices are quoted to 4 decimals
        assert max(repricing_errors(curve, insts)) < 1e-9
    write_curve(curve, tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().startswith("maturity_years,discount_factor,zero_rate\n")


def test_bill_coupon_ignored():
    rec = AuctionRecord(date(2020, 1, 1), Maturity.in_weeks(26), 3.0, 97.0, 6.2)
    (inst,) = instruments_from_dataset(Dataset([rec]))
    assert inst.coupon == 0.0 and inst.maturity_years == 0.5
