"""Domain types for sovereign auction panels.

A :class:`Dataset` is an ordered panel of :class:`AuctionRecord` rows plus an
explicit boolean mask over the three imputable variables (coupon, price,
yield).  Missing values are ``None`` on the record and ``False`` in the mask;
no sentinel numbers are ever stored.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from datetime import date
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

WEEKS_PER_YEAR = 52
PRICE_BOUNDS = (0.0, 300.0)
RATE_BOUNDS = (0.0, 100.0)


class Variable(str, enum.Enum):
    COUPON = "coupon"
    PRICE = "price"
    YIELD = "yield"

    @property
    def column(self) -> int:
        return VARIABLES.index(self)

    @classmethod
    def parse(cls, name: str) -> "Variable":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown variable {name!r}; expected one of: {valid}") from None


VARIABLES: tuple[Variable, ...] = (Variable.COUPON, Variable.PRICE, Variable.YIELD)


class MissingnessMechanism(str, enum.Enum):
    """Missingness taxonomy. Only MCAR can be generated."""

    MCAR = "MCAR"
    MAR = "MAR"
    MNAR = "MNAR"

    @property
    def can_generate(self) -> bool:
        return self is MissingnessMechanism.MCAR


@dataclass(frozen=True)
class Maturity:
    """Tenor of an auctioned security.

    Stored canonically: weeks below one year, years otherwise, with
    52 weeks = 1 year.  ``Maturity(52, "weeks") == Maturity(1, "years")``.
    """

    value: Fraction
    unit: str = "years"

    def __post_init__(self) -> None:
        if self.unit not in ("weeks", "years"):
            raise ValueError(f"maturity unit must be 'weeks' or 'years', got {self.unit!r}")
        value = Fraction(self.value)
        if value <= 0:
            raise ValueError(f"maturity must be positive, got {value}")
        years = value / WEEKS_PER_YEAR if self.unit == "weeks" else value
        if years < 1:
            object.__setattr__(self, "value", years * WEEKS_PER_YEAR)
            object.__setattr__(self, "unit", "weeks")
        else:
            object.__setattr__(self, "value", years)
            object.__setattr__(self, "unit", "years")

    @classmethod
    def in_weeks(cls, n) -> "Maturity":
        return cls(Fraction(n), "weeks")

    @classmethod
    def in_years(cls, n) -> "Maturity":
        return cls(Fraction(n), "years")

    @property
    def years(self) -> Fraction:
        return self.value / WEEKS_PER_YEAR if self.unit == "weeks" else self.value

    def __lt__(self, other: "Maturity") -> bool:
        return self.years < other.years

    def __str__(self) -> str:
        return f"{self.value}{'w' if self.unit == 'weeks' else 'y'}"


@dataclass(frozen=True)
class AuctionRecord:
    """One auction result. ``coupon``/``price``/``yield_`` may be ``None``."""

    auction_date: date
    maturity: Maturity
    coupon: Optional[float] = None
    price: Optional[float] = None
    yield_: Optional[float] = None

    def get(self, variable: Variable) -> Optional[float]:
        if variable is Variable.YIELD:
            return self.yield_
        return getattr(self, variable.value)

    def with_value(self, variable: Variable, value: Optional[float]) -> "AuctionRecord":
        name = "yield_" if variable is Variable.YIELD else variable.value
        return replace(self, **{name: value})

    @property
    def key(self) -> tuple[date, Fraction]:
        return (self.auction_date, self.maturity.years)


class Dataset:
    """Ordered auction panel with a record x variable observation mask.

    Instances are treated as immutable: the mask array is read-only and every
    transformation returns a new ``Dataset``.  The constructor does not
    enforce invariants; use :func:`dataset_validate`.
    """

    __slots__ = ("records", "mask", "_values")

    def __init__(self, records: Iterable[AuctionRecord], mask: Optional[np.ndarray] = None):
        self.records: tuple[AuctionRecord, ...] = tuple(records)
        if mask is None:
            mask = np.array(
                [[r.get(v) is not None for v in VARIABLES] for r in self.records], dtype=bool
            ).reshape(len(self.records), len(VARIABLES))
        else:
            mask = np.array(mask, dtype=bool, copy=True)
        mask.setflags(write=False)
        self.mask = mask
        self._values: Optional[np.ndarray] = None

    @classmethod
    def from_records(cls, records: Iterable[AuctionRecord]) -> "Dataset":
        """Build a canonically sorted dataset whose mask follows the fields."""
        return cls(sorted(records, key=lambda r: r.key))

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.records == other.records and np.array_equal(self.mask, other.mask)

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)}, missing={int((~self.mask).sum())})"

    def values(self) -> np.ndarray:
        """``(n, 3)`` float array; unobserved cells are NaN."""
        if self._values is None:
            out = np.full((len(self.records), len(VARIABLES)), np.nan)
            for i, rec in enumerate(self.records):
                for j, v in enumerate(VARIABLES):
                    if self.mask[i, j]:
                        val = rec.get(v)
                        if val is not None:
                            out[i, j] = val
            out.setflags(write=False)
            self._values = out
        return self._values

    def maturity_years(self) -> np.ndarray:
        return np.array([float(r.maturity.years) for r in self.records])

    def date_ordinals(self) -> np.ndarray:
        return np.array([r.auction_date.toordinal() for r in self.records], dtype=np.int64)

    def maturity_groups(self) -> dict[Maturity, np.ndarray]:
        """Row indices per maturity, each in date order (relies on canonical sort)."""
        groups: dict[Maturity, list[int]] = {}
        for i, rec in enumerate(self.records):
            groups.setdefault(rec.maturity, []).append(i)
        return {m: np.array(ix, dtype=np.int64) for m, ix in sorted(groups.items(), key=lambda kv: kv[0].years)}

    def with_values(self, values: np.ndarray, mask: np.ndarray) -> "Dataset":
        """Return a copy whose fields are taken from ``values`` where ``mask`` holds.

        Cells whose value is already identical are reused untouched so that
        observed floats stay bit-identical.
        """
        values = np.asarray(values, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        records = []
        for i, rec in enumerate(self.records):
            updates = {}
            for j, v in enumerate(VARIABLES):
                new = float(values[i, j]) if mask[i, j] else None
                old = rec.get(v)
                if new is None or old is None or new != old:
                    updates[v] = new
            for v, new in updates.items():
                rec = rec.with_value(v, new)
            records.append(rec)
        return Dataset(records, mask)

    def cross_section(self, on: date) -> "Dataset":
        idx = [i for i, r in enumerate(self.records) if r.auction_date == on]
        return Dataset([self.records[i] for i in idx], self.mask[idx])

    def dates(self) -> list[date]:
        return sorted({r.auction_date for r in self.records})


@dataclass(frozen=True)
class MaskConfig:
    """MCAR masking parameters.

    ``targets`` holds variable names and/or ``"row"`` (whole-row masking,
    which hides all three variables of the selected records).
    """

    missing_rate: float = 0.35
    seed: int = 0
    targets: frozenset = field(default_factory=lambda: frozenset(v.value for v in VARIABLES))

    def __post_init__(self) -> None:
        if not (0.0 <= self.missing_rate <= 1.0) or math.isnan(self.missing_rate):
            raise ValueError(f"missing_rate must lie in [0, 1], got {self.missing_rate}")
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        targets = frozenset(str(t).lower() for t in self.targets)
        allowed = {v.value for v in VARIABLES} | {"row"}
        unknown = targets - allowed
        if unknown or not targets:
            raise ValueError(f"targets must be a non-empty subset of {sorted(allowed)}, got {sorted(targets)}")
        if "row" in targets and len(targets) > 1:
            raise ValueError("whole-row masking ('row') cannot be combined with variable targets")
        object.__setattr__(self, "targets", targets)

    @property
    def whole_row(self) -> bool:
        return "row" in self.targets

    @property
    def variables(self) -> tuple[Variable, ...]:
        if self.whole_row:
            return VARIABLES
        return tuple(v for v in VARIABLES if v.value in self.targets)


@dataclass(frozen=True)
class Violation:
    record: Optional[int]
    field: str
    rule: str

    def __str__(self) -> str:
        where = "dataset" if self.record is None else f"record {self.record}"
        return f"{where}, {self.field}: {self.rule}"


def dataset_validate(d: Dataset) -> list[Violation]:
    """Check every Dataset invariant; an empty list means the dataset is valid."""
    out: list[Violation] = []
    n = len(d.records)
    if d.mask.shape != (n, len(VARIABLES)):
        out.append(Violation(None, "mask", f"shape {d.mask.shape} != ({n}, {len(VARIABLES)})"))
        return out
    prev_key = None
    for i, rec in enumerate(d.records):
        if not isinstance(rec.auction_date, date):
            out.append(Violation(i, "auction_date", "auction date is missing"))
        if not isinstance(rec.maturity, Maturity):
            out.append(Violation(i, "maturity", "maturity is missing"))
        for j, v in enumerate(VARIABLES):
            val = rec.get(v)
            if d.mask[i, j] and val is None:
                out.append(Violation(i, v.value, "mask marks cell observed but value is absent"))
            elif not d.mask[i, j] and val is not None:
                out.append(Violation(i, v.value, "mask marks cell missing but value is present"))
            if val is None:
                continue
            if not math.isfinite(val):
                out.append(Violation(i, v.value, f"non-finite value {val}"))
            elif v is Variable.PRICE and not (PRICE_BOUNDS[0] < val <= PRICE_BOUNDS[1]):
                out.append(Violation(i, v.value, f"price {val} outside (0, 300]"))
            elif v is not Variable.PRICE and not (RATE_BOUNDS[0] <= val <= RATE_BOUNDS[1]):
                out.append(Violation(i, v.value, f"{v.value} {val} outside [0, 100]"))
        if isinstance(rec.auction_date, date) and isinstance(rec.maturity, Maturity):
            key = rec.key
            if prev_key is not None:
                if key == prev_key:
                    out.append(Violation(i, "sort_order", "duplicate (auction_date, maturity)"))
                elif key < prev_key:
                    out.append(Violation(i, "sort_order", "records not sorted by (auction_date, maturity)"))
            prev_key = key
    return out


def missing_fraction(d: Dataset, variables: Sequence[Variable] = VARIABLES) -> float:
    """Fraction of unobserved cells over the given variables."""
    if len(d) == 0:
        raise ValueError("empty dataset")
    cols = [Variable(v).column for v in variables]
    sub = d.mask[:, cols]
    return float((~sub).sum()) / sub.size
