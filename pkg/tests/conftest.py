from __future__ import annotations

from datetime import date, timedelta
from fractions import Fraction

import numpy as np
import pytest

from bondimpute.core import AuctionRecord, Dataset, Maturity

START = date(2020, 1, 1)


def make_panel(values, mask=None, maturities=None, dates=None) -> Dataset:
    """Dataset from an ``(n, 3)`` array; NaN (or ``mask`` False) marks missing cells.

    Defaults put every row on one 2-year series with weekly dates.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if mask is None:
        mask = ~np.isnan(values)
    if maturities is None:
        maturities = [Maturity(Fraction(2), "years")] * n
    if dates is None:
        dates = [START + timedelta(weeks=i) for i in range(n)]
    records = []
    for i in range(n):
        vals = [float(values[i, j]) if mask[i, j] else None for j in range(3)]
        records.append(AuctionRecord(dates[i], maturities[i], *vals))
    order = sorted(range(n), key=lambda i: records[i].key)
    return Dataset([records[i] for i in order], np.asarray(mask)[order])


def random_panel(seed: int, missing: float = 0.3, min_observed: int = 5) -> Dataset:
    """Small random panel (2-4 tenors x 4-10 dates) with a random gap pattern."""
    rng = np.random.default_rng(seed)
    n_dates = int(rng.integers(4, 11))
    tenors = sorted(rng.choice([Fraction(1, 4), Fraction(1, 2), 1, 2, 3, 5, 10], size=int(rng.integers(2, 5)), replace=False))
    rows, mats, dts = [], [], []
    level = rng.uniform(4, 12)
    for k in range(n_dates):
        level += rng.normal(0, 0.3)
        for t in tenors:
            y = level + 0.4 * float(t) + rng.normal(0, 0.2)
            coupon = round(y * 4) / 4
            price = 100 + (coupon - y) * min(float(t), 5) + rng.normal(0, 0.05)
            rows.append([coupon, price, y])
            mats.append(Maturity(Fraction(t), "years"))
            dts.append(START + timedelta(weeks=k))
    values = np.array(rows)
    mask = rng.random(values.shape) >= missing
    for j in range(3):
        obs = np.flatnonzero(mask[:, j])
        if obs.size < min_observed:
            mask[rng.choice(values.shape[0], size=min_observed, replace=False), j] = True
    return make_panel(values, mask, mats, dts)


@pytest.fixture
def panel_factory():
    return make_panel


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record a one-line verdict for an acceptance criterion."""

    def record(label: str, passed: bool, detail: str = "") -> None:
        _CRITERIA.append(f"[{'PASS' if passed else 'FAIL'}] {label}" + (f" -- {detail}" if detail else ""))
        assert passed, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
