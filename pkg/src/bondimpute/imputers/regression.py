"""Per-maturity time-trend regression on previously issued data."""

from __future__ import annotations

import numpy as np

from ..core import VARIABLES, Dataset
from .base import ImputationResult, ImputerKind, finish


def ols_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Intercept and slope of the least-squares line through ``(x, y)``."""
    x0 = x.mean()
    dx = x - x0
    sxx = float(dx @ dx)
    if sxx == 0.0:
        return float(y.mean()), 0.0
    slope = float(dx @ (y - y.mean())) / sxx
    return float(y.mean()) - slope * x0, slope


def impute_linear_regression(d: Dataset) -> ImputationResult:
    """Predict each gap from an OLS trend in auction date fitted to earlier observations.

    Only cells observed strictly before the gap's date in the same
    (maturity, variable) series are used.  One prior observation falls back to
    carrying it forward; none leaves the cell missing.
    """
    values = np.array(d.values())
    mask = np.array(d.mask)
    ordinals = d.date_ordinals().astype(float)
    regressions = carried = 0
    for idx in d.maturity_groups().values():
        t = ordinals[idx]
        for j in range(len(VARIABLES)):
            obs = d.mask[idx, j]
            if obs.all():
                continue
            for pos in np.flatnonzero(~obs):
                prior = obs & (t < t[pos])
                n_prior = int(prior.sum())
                if n_prior == 0:
                    continue
                y = d.values()[idx[prior], j]
                if n_prior == 1:
                    pred = float(y[0])
                    carried += 1
                else:
                    # centre dates on the gap so the prediction is the intercept
                    a, _ = ols_line(t[prior] - t[pos], y)
                    pred = a
                    regressions += 1
                values[idx[pos], j] = pred
                mask[idx[pos], j] = True
    return finish(
        d, values, mask, ImputerKind.LINEAR_REGRESSION, regressions=regressions, carry_forward_fallbacks=carried
    )
