"""k-nearest-neighbour imputation with exp(-distance) donor weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import VARIABLES, Dataset
from .base import ImputationResult, ImputerKind, PreconditionError, finish


@dataclass(frozen=True)
class KnnConfig:
    k: int = 10

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


def standardized_features(d: Dataset) -> np.ndarray:
    """Columns: coupon, price, yield, maturity in years, date ordinal; z-scored, NaN where unobserved."""
    raw = np.column_stack([d.values(), d.maturity_years(), d.date_ordinals().astype(float)])
    mean = np.nanmean(raw, axis=0) if len(d) else np.zeros(raw.shape[1])
    with np.errstate(invalid="ignore"):
        sd = np.array([np.std(c[~np.isnan(c)], ddof=1) if (~np.isnan(c)).sum() > 1 else 0.0 for c in raw.T])
    sd[~np.isfinite(sd) | (sd == 0)] = 1.0
    return (raw - mean) / sd


def donor_distances(z: np.ndarray, targets: np.ndarray, donors: np.ndarray, features: list[int]) -> np.ndarray:
    """Euclidean distance over the features observed in both rows.

    The squared sum is rescaled by ``len(features) / n_shared`` so rows sharing
    fewer coordinates are not artificially closer.  Pairs sharing nothing get
    ``inf``.
    """
    a = z[np.ix_(targets, features)][:, None, :]
    b = z[np.ix_(donors, features)][None, :, :]
    diff = a - b
    shared = ~np.isnan(diff)
    sq = np.where(shared, diff, 0.0) ** 2
    n_shared = shared.sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = np.sqrt(sq.sum(axis=2) * len(features) / n_shared)
    dist[n_shared == 0] = np.inf
    return dist


def impute_knn(d: Dataset, cfg: KnnConfig = KnnConfig()) -> ImputationResult:
    """Fill each missing cell with the exp(-d)-weighted mean of its k nearest donors.

    Donors are rows observing the target variable.  Distance ties are broken by
    canonical row order.
    """
    values = np.array(d.values())
    mask = np.array(d.mask)
    if mask.all():
        return finish(d, values, mask, ImputerKind.KNN, k=cfg.k)
    z = standardized_features(d)
    n_features = z.shape[1]
    unreachable = 0
    for j, var in enumerate(VARIABLES):
        targets = np.flatnonzero(~d.mask[:, j])
        if targets.size == 0:
            continue
        donors = np.flatnonzero(d.mask[:, j])
        if donors.size < cfg.k:
            i = int(targets[0])
            raise PreconditionError(
                f"insufficient donors for cell (record {i}, {var.value}): "
                f"{donors.size} rows observe {var.value}, k = {cfg.k}"
            )
        features = [f for f in range(n_features) if f != j]
        dist = donor_distances(z, targets, donors, features)
        for row, i in enumerate(targets):
            drow = dist[row]
            if not np.isfinite(drow).any():
                unreachable += 1
                continue
            nearest = np.argsort(drow, kind="stable")[: cfg.k]
            dn = drow[nearest]
            if not np.isfinite(dn).all():
                raise PreconditionError(f"insufficient donors for cell (record {int(i)}, {var.value})")
            w = np.exp(-(dn - dn.min()))
            w /= w.sum()
            values[i, j] = float(np.dot(w, d.values()[donors[nearest], j]))
            mask[i, j] = True
    return finish(d, values, mask, ImputerKind.KNN, k=cfg.k, unreachable_cells=unreachable)
