"""Sequential zero-curve bootstrapping from annual-coupon bonds and discount bills.

Conventions: coupons are paid annually in arrears, zero rates are annually
compounded (``df = (1 + z) ** -t``), and instruments maturing before one year
are pure discount bills (``df = price / 100``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

from .core import Dataset, Variable

FACE = 100.0


class IncompleteSeriesError(ValueError):
    pass


class ArbitrageError(ValueError):
    pass


@dataclass(frozen=True)
class CurveInstrument:
    maturity_years: float
    coupon: float
    price: float


@dataclass(frozen=True)
class CurvePoint:
    maturity_years: float
    discount_factor: float
    zero_rate: float  # percent, annual compounding


@dataclass(frozen=True)
class ZeroCurve:
    points: tuple[CurvePoint, ...]

    def discount_factor(self, t: float) -> float:
        for p in self.points:
            if abs(p.maturity_years - t) < 1e-12:
                return p.discount_factor
        raise KeyError(t)


def zero_rate(df: float, t: float) -> float:
    return 100.0 * (df ** (-1.0 / t) - 1.0)


def _tenor_label(t: float) -> str:
    return f"{t:g}y"


def bootstrap(instruments: Sequence[CurveInstrument]) -> ZeroCurve:
    """Solve discount factors node by node.

    Coupon bonds must cover every integer-year tenor from 1 to the longest
    maturity; each is solved as ``df_n = (P_n - c_n * sum(df_1..df_{n-1})) / (100 + c_n)``.
    Raises :class:`IncompleteSeriesError` on a missing tenor and
    :class:`ArbitrageError` when a solved discount factor is not positive or
    fails to decrease with maturity.
    """
    items = list(instruments)
    if not items:
        raise IncompleteSeriesError("incomplete series: no instruments")
    for a, b in zip(items, items[1:]):
        if not b.maturity_years > a.maturity_years:
            raise ValueError(
                f"instruments must be sorted by strictly increasing maturity "
                f"({a.maturity_years:g} then {b.maturity_years:g})"
            )
    for inst in items:
        for name in ("maturity_years", "coupon", "price"):
            val = getattr(inst, name)
            if val is None or not math.isfinite(val):
                raise IncompleteSeriesError(f"incomplete series: {name} missing at {_tenor_label(inst.maturity_years)}")
        if inst.maturity_years <= 0:
            raise ValueError(f"maturity must be positive, got {inst.maturity_years}")

    points: list[CurvePoint] = []
    annual: list[float] = []
    expected = 1
    last_df = 1.0
    for inst in items:
        t = inst.maturity_years
        if t < 1.0:
            df = inst.price / FACE
        else:
            if abs(t - round(t)) > 1e-9:
                raise IncompleteSeriesError(f"maturity {t:g}y is not on the annual grid")
            if round(t) != expected:
                raise IncompleteSeriesError(f"incomplete series: missing {expected}y tenor")
            c = inst.coupon
            df = (inst.price - c * sum(annual)) / (FACE + c)
            t = float(round(t))
            annual.append(df)
            expected += 1
        if df <= 0:
            raise ArbitrageError(f"arbitrage-violating inputs: non-positive discount factor at {_tenor_label(t)}")
        if df >= last_df:
            raise ArbitrageError(
                f"arbitrage-violating inputs: discount factor at {_tenor_label(t)} does not decrease ({df:.6g} >= {last_df:.6g})"
            )
        last_df = df
        if t == 1.0:
            # (1 + z) = (100 + c) / P at the first annual node; avoids dividing by a rounded df
            c = 0.0 if inst.maturity_years < 1.0 else inst.coupon
            z = ((FACE - inst.price) + c) * (100.0 / inst.price)
        else:
            z = zero_rate(df, t)
        points.append(CurvePoint(t, df, z))
    return ZeroCurve(tuple(points))


def price_bond(curve: ZeroCurve, coupon: float, maturity_years: float) -> float:
    """Price per 100 face from the curve's nodes; no interpolation."""
    if maturity_years < 1.0:
        try:
            return FACE * curve.discount_factor(maturity_years)
        except KeyError:
            raise ValueError(f"cash-flow date {maturity_years:g}y is off the curve grid") from None
    if abs(maturity_years - round(maturity_years)) > 1e-9:
        raise ValueError(f"cash-flow date {maturity_years:g}y is off the annual grid")
    n = int(round(maturity_years))
    dfs = []
    for k in range(1, n + 1):
        try:
            dfs.append(curve.discount_factor(float(k)))
        except KeyError:
            raise ValueError(f"cash-flow date {k}y is off the curve grid") from None
    return coupon * sum(dfs) + FACE * dfs[-1]


def instruments_from_dataset(d: Dataset) -> list[CurveInstrument]:
    """Instruments from a single-date cross-section. Unobserved cells become NaN."""
    vals = d.values()
    out = []
    for i, rec in enumerate(d.records):
        out.append(
            CurveInstrument(
                float(rec.maturity.years),
                0.0 if rec.maturity.years < 1 else float(vals[i, Variable.COUPON.column]),
                float(vals[i, Variable.PRICE.column]),
            )
        )
    return out


def repricing_errors(curve: ZeroCurve, instruments: Iterable[CurveInstrument]) -> list[float]:
    return [abs(price_bond(curve, inst.coupon, inst.maturity_years) - inst.price) for inst in instruments]


def write_curve(curve: ZeroCurve, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["maturity_years", "discount_factor", "zero_rate"])
        for p in curve.points:
            w.writerow([repr(p.maturity_years), repr(p.discount_factor), repr(p.zero_rate)])
