"""Exact-count MCAR masking of complete panels."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Union

import numpy as np

from .core import VARIABLES, Dataset, MaskConfig, Variable
from .rng import generator

Cell = tuple[int, Variable]


class IncompleteDatasetError(ValueError):
    pass


@dataclass(frozen=True)
class MaskPlan:
    """Cells to hide, sorted by (record index, variable order)."""

    cells: tuple[Cell, ...]
    seed: int
    rate: float

    def __len__(self) -> int:
        return len(self.cells)

    def cells_for(self, variable: Variable) -> tuple[Cell, ...]:
        return tuple(c for c in self.cells if c[1] is variable)


def target_count(rate: float, n: int) -> int:
    """``round(rate * n)`` with halves rounded up, evaluated on the decimal repr of ``rate``."""
    exact = Decimal(repr(float(rate))) * n
    return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def plan_mcar(d: Dataset, cfg: MaskConfig) -> MaskPlan:
    """Choose exactly ``round(rate * N)`` targeted cells uniformly without replacement.

    The draw only sees cell positions, never values, which is what makes the
    mechanism MCAR.  In whole-row mode the sampled units are records and every
    variable of a chosen record is hidden.
    """
    cols = [v.column for v in cfg.variables]
    if not d.mask[:, cols].all():
        raise IncompleteDatasetError("dataset not complete")
    n = len(d)
    if cfg.whole_row:
        k = target_count(cfg.missing_rate, n)
        rows = generator(cfg.seed).choice(n, size=k, replace=False) if k else np.empty(0, dtype=np.int64)
        cells = [(int(i), v) for i in sorted(rows.tolist()) for v in VARIABLES]
    else:
        units = [(i, v) for i in range(n) for v in cfg.variables]
        k = target_count(cfg.missing_rate, len(units))
        picks = generator(cfg.seed).choice(len(units), size=k, replace=False) if k else []
        cells = [units[j] for j in sorted(int(p) for p in picks)]
    return MaskPlan(tuple(cells), cfg.seed, cfg.missing_rate)


def apply_mask(d: Dataset, plan: MaskPlan) -> tuple[Dataset, Dataset]:
    """Hide the planned cells. Returns ``(masked, truth)`` with ``truth is d``."""
    mask = d.mask.copy()
    for i, v in plan.cells:
        if not (0 <= i < len(d)):
            raise IndexError(f"plan references absent record {i} (dataset has {len(d)} records)")
        if not mask[i, v.column]:
            raise ValueError(f"plan references unobserved cell (record {i}, {v.value})")
        mask[i, v.column] = False
    return d.with_values(d.values(), mask), d


def write_plan(plan: MaskPlan, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["record_index", "variable"])
        for i, v in plan.cells:
            w.writerow([i, v.value])


def read_plan(path: Union[str, Path], seed: int = 0, rate: float = float("nan")) -> MaskPlan:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["record_index", "variable"]:
        raise ValueError(f"{path}: expected header 'record_index,variable'")
    cells = tuple(sorted(((int(i), Variable.parse(v)) for i, v in rows[1:]), key=lambda c: (c[0], c[1].column)))
    return MaskPlan(cells, seed, rate)
