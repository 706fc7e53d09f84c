"""Carry-forward (previous value) and carry-backward (next value) fills."""

from __future__ import annotations

import numpy as np

from ..core import Dataset
from .base import ImputationResult, ImputerKind, finish


def carry(values: np.ndarray, mask: np.ndarray, groups, backward: bool = False) -> tuple[np.ndarray, np.ndarray, int]:
    """Fill gaps within each index group from the nearest earlier (or later) observed cell.

    Returns new ``(values, mask, n_filled)``.  Only cells observed in the input
    ``mask`` act as sources, so filling is idempotent.
    """
    values = np.array(values, dtype=float)
    out_mask = np.array(mask, dtype=bool)
    filled = 0
    for idx in groups:
        order = idx[::-1] if backward else idx
        for j in range(values.shape[1]):
            last = None
            for i in order:
                if mask[i, j]:
                    last = values[i, j]
                elif last is not None:
                    values[i, j] = last
                    out_mask[i, j] = True
                    filled += 1
    return values, out_mask, filled


def impute_previous(d: Dataset) -> ImputationResult:
    """Last observation carried forward within each maturity, in auction-date order."""
    values, mask, n = carry(d.values(), d.mask, d.maturity_groups().values())
    return finish(d, values, mask, ImputerKind.PREVIOUS, filled=n)


def impute_next(d: Dataset) -> ImputationResult:
    """Next observation carried backward within each maturity."""
    values, mask, n = carry(d.values(), d.mask, d.maturity_groups().values(), backward=True)
    return finish(d, values, mask, ImputerKind.NEXT, filled=n)
