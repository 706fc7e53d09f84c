"""Synthetic weekly auction panels that satisfy the curve bootstrapper's preconditions.

Each auction date carries a full discount curve built from positive forward
rates, so every date's cross-section bootstraps cleanly.  Bills (up to 52
weeks) are quoted as pure discount instruments; bonds carry an annual coupon
set near the par yield, a price from the curve and the matching yield to
maturity.
"""

from __future__ import annotations

from datetime import date, timedelta
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .core import AuctionRecord, Dataset, Maturity
from .rng import generator

GRID: tuple[Maturity, ...] = (
    Maturity.in_weeks(13),
    Maturity.in_weeks(26),
    Maturity.in_weeks(52),
    *(Maturity.in_years(n) for n in range(2, 11)),
)
FIRST_AUCTION = date(2016, 1, 6)  # a Wednesday; auctions are weekly


def _tenors() -> np.ndarray:
    return np.array([float(m.years) for m in GRID])


def discount_factors(forwards: np.ndarray, tenors: np.ndarray) -> np.ndarray:
    """Chain annual-compounded forward rates (percent) between consecutive nodes."""
    steps = np.diff(np.concatenate([[0.0], tenors]))
    return np.cumprod((1.0 + forwards / 100.0) ** -steps)


def yield_to_maturity(price: float, coupon: float, n_years: int) -> float:
    """Annual-compounded flat yield (percent) reproducing ``price`` for an annual-coupon bond."""
    k = np.arange(1, n_years + 1)

    def gap(y):
        disc = (1.0 + y / 100.0) ** -k
        return coupon * disc.sum() + 100.0 * disc[-1] - price

    return float(brentq(gap, -50.0, 500.0, xtol=1e-12))


def _records_for_date(when: date, dfs: np.ndarray, tenors: np.ndarray, coupon_tick: float) -> list[AuctionRecord]:
    out = []
    annual = {int(round(t)): df for t, df in zip(tenors, dfs) if t >= 1}
    for m, t, df in zip(GRID, tenors, dfs):
        if t <= 1.0:
            price = round(100.0 * df, 4)
            yld = round(100.0 * ((100.0 / price) ** (1.0 / t) - 1.0), 4)
            out.append(AuctionRecord(when, m, 0.0, price, yld))
            continue
        n = int(round(t))
        annuity = sum(annual[k] for k in range(1, n + 1))
        par = 100.0 * (1.0 - annual[n]) / annuity
        coupon = round(par / coupon_tick) * coupon_tick if coupon_tick else round(par, 4)
        price = round(coupon * annuity + 100.0 * annual[n], 4)
        out.append(AuctionRecord(when, m, coupon, price, round(yield_to_maturity(price, coupon, n), 4)))
    return out


def synthetic_panel(rows: int, seed: int, start: date = FIRST_AUCTION) -> Dataset:
    """Complete panel of ``rows`` records over consecutive weekly auctions.

    Forward rates per tenor are a common random-walk level plus a rising term
    premium plus a tenor-specific random walk, floored at 0.25%.  A trailing
    partial date holds the shortest tenors, so it still bootstraps.
    """
    if rows < 1:
        raise ValueError(f"rows must be >= 1, got {rows}")
    rng = generator(seed)
    tenors = _tenors()
    n_dates = -(-rows // len(GRID))
    level = 8.0
    spread = np.zeros(len(GRID))
    premium = 4.0 * (1.0 - np.exp(-tenors / 3.0))
    records: list[AuctionRecord] = []
    for k in range(n_dates):
        if k:
            level = float(np.clip(level + rng.normal(0.0, 0.08), 3.0, 18.0))
            spread = np.clip(spread + rng.normal(0.0, 0.05, len(GRID)), -1.5, 1.5)
        forwards = np.maximum(level + premium + spread, 0.25)
        dfs = discount_factors(forwards, tenors)
        records.extend(_records_for_date(start + timedelta(weeks=k), dfs, tenors, 0.125))
    return Dataset.from_records(records[:rows])


def synthetic_linear_panel(rows: int, seed: int, start: date = FIRST_AUCTION) -> Dataset:
    """Panel whose zero rates move on exact straight lines in time, one line per tenor.

    ``seed`` only picks each tenor's intercept and weekly drift.
    """
    if rows < 1:
        raise ValueError(f"rows must be >= 1, got {rows}")
    rng = generator(seed)
    tenors = _tenors()
    n_dates = -(-rows // len(GRID))
    base = 6.0 + 3.0 * (1.0 - np.exp(-tenors / 3.0)) + np.sort(rng.uniform(0.0, 0.5, len(GRID)))
    drift = rng.uniform(-0.01, 0.03, len(GRID))
    # keep forwards positive: the drift may not undo the term slope within the panel
    drift = np.sort(drift)
    records: list[AuctionRecord] = []
    for k in range(n_dates):
        zero = base + drift * k
        dfs = (1.0 + zero / 100.0) ** -tenors
        records.extend(_records_for_date(start + timedelta(weeks=k), dfs, tenors, 0.0))
    return Dataset.from_records(records[:rows])


def grid_years() -> list[Fraction]:
    return [m.years for m in GRID]
