"""CSV ingestion/emission of auction panels and flat ``key = value`` run configs."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, fields
from datetime import date
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .core import VARIABLES, AuctionRecord, Dataset, Maturity, dataset_validate

PathLike = Union[str, Path]

_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


class DataFormatError(ValueError):
    """Malformed dataset file. Carries the offending line and column when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[str] = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CsvSchema:
    columns: tuple[str, ...] = ("auction_date", "maturity_value", "maturity_unit", "coupon", "price", "yield")
    missing_markers: tuple[str, ...] = ("", "NA")
    missing_out: str = "NA"


SCHEMA = CsvSchema()


def _format_number(x: float) -> str:
    # repr is the shortest string that round-trips exactly
    return repr(float(x))


def _format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_number(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataFormatError(f"unparseable number {text!r}", line, column) from None
    if not math.isfinite(value):
        raise DataFormatError(f"non-finite number {text!r}", line, column)
    return value


def _parse_row(row: list[str], line: int, schema: CsvSchema) -> AuctionRecord:
    if len(row) != len(schema.columns):
        raise DataFormatError(f"expected {len(schema.columns)} fields, found {len(row)}", line)
    cells = dict(zip(schema.columns, (c.strip() for c in row)))

    text = cells["auction_date"]
    if not _ISO_DATE.match(text):
        raise DataFormatError(f"date {text!r} is not YYYY-MM-DD", line, "auction_date")
    try:
        when = date.fromisoformat(text)
    except ValueError:
        raise DataFormatError(f"invalid date {text!r}", line, "auction_date") from None

    try:
        mvalue = Fraction(cells["maturity_value"])
    except (ValueError, ZeroDivisionError):
        raise DataFormatError(f"unparseable maturity {cells['maturity_value']!r}", line, "maturity_value") from None
    try:
        maturity = Maturity(mvalue, cells["maturity_unit"])
    except ValueError as exc:
        column = "maturity_unit" if cells["maturity_unit"] not in ("weeks", "years") else "maturity_value"
        raise DataFormatError(str(exc), line, column) from None

    values = {}
    for v in VARIABLES:
        text = cells[v.value]
        values[v] = None if text in schema.missing_markers else _parse_number(text, line, v.value)
    return AuctionRecord(when, maturity, values[VARIABLES[0]], values[VARIABLES[1]], values[VARIABLES[2]])


def read_dataset(path: PathLike, schema: CsvSchema = SCHEMA) -> Dataset:
    """Parse an auction CSV into a validated, canonically sorted :class:`Dataset`.

    Both ``NA`` and the empty string decode as missing.  Any malformed input
    raises :class:`DataFormatError` located by line and column; no partial
    dataset is ever returned.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"missing header; expected {','.join(schema.columns)}", 1) from None
        if tuple(header) != schema.columns:
            raise DataFormatError(
                f"header mismatch: expected {','.join(schema.columns)!r}, found {','.join(header)!r}", 1
            )
        parsed: list[tuple[AuctionRecord, int]] = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            parsed.append((_parse_row(row, line, schema), line))

    parsed.sort(key=lambda rl: rl[0].key)
    d = Dataset(r for r, _ in parsed)
    problems = dataset_validate(d)
    if problems:
        first = problems[0]
        line = parsed[first.record][1] if first.record is not None else None
        column = first.field if first.field in schema.columns else None
        extra = f" (+{len(problems) - 1} more)" if len(problems) > 1 else ""
        raise DataFormatError(first.rule + extra, line, column)
    return d


def write_dataset(d: Dataset, path: PathLike, schema: CsvSchema = SCHEMA) -> None:
    """Write ``d`` so that :func:`read_dataset` reproduces it exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(schema.columns)
        for i, rec in enumerate(d.records):
            row = [rec.auction_date.isoformat(), _format_fraction(rec.maturity.value), rec.maturity.unit]
            for j, v in enumerate(VARIABLES):
                val = rec.get(v)
                row.append(_format_number(val) if d.mask[i, j] and val is not None else schema.missing_out)
            writer.writerow(row)


METHOD_NAMES = ("previous", "next", "knn", "mice", "missforest", "linear_regression")


@dataclass(frozen=True)
class RunConfig:
    """Benchmark configuration. ``seed`` has no default."""

    seed: int
    repetitions: int = 100
    missing_rate: float = 0.35
    methods: tuple[str, ...] = METHOD_NAMES
    knn_k: int = 10
    mice_iterations: int = 5
    mice_imputations: int = 5
    forest_trees: int = 100
    alpha: float = 0.05

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        if self.repetitions < 3:
            raise ConfigError(f"repetitions must be >= 3 (Shapiro-Wilk needs n >= 3), got {self.repetitions}")
        if not (0.0 <= self.missing_rate <= 1.0):
            raise ConfigError(f"missing_rate must lie in [0, 1], got {self.missing_rate}")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        for name in ("knn_k", "mice_iterations", "mice_imputations", "forest_trees"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        methods = tuple(self.methods)
        if not methods:
            raise ConfigError("methods must name at least one method")
        bad = [m for m in methods if m not in METHOD_NAMES]
        if bad:
            raise ConfigError(f"unknown method {bad[0]!r}; valid: {', '.join(METHOD_NAMES)}")
        if len(set(methods)) != len(methods):
            raise ConfigError("methods contains duplicates")
        object.__setattr__(self, "methods", methods)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "methods":
                value = ", ".join(value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


_INT_KEYS = {"seed", "repetitions", "knn_k", "mice_iterations", "mice_imputations", "forest_trees"}
_FLOAT_KEYS = {"missing_rate", "alpha"}


def _parse_methods(text: str) -> tuple[str, ...]:
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    items = [t.strip().strip("'\"").strip() for t in text.split(",")]
    return tuple(t for t in items if t)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', found {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key == "methods":
                values[key] = _parse_methods(value)
            else:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {value!r}") from None
    if "seed" not in values:
        raise ConfigError(f"{source}: 'seed' is required")
    return RunConfig(**values)  # type: ignore[arg-type]


def read_config(path: PathLike) -> RunConfig:
    """Read a flat ``key = value`` config file, applying defaults for absent keys."""
    return parse_config(Path(path).read_text(encoding="utf-8"), str(path))


def write_config(cfg: RunConfig, path: PathLike) -> None:
    Path(path).write_text(cfg.to_text(), encoding="utf-8")
