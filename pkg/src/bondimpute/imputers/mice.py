"""Chained-equation imputation with OLS conditionals and predictive mean matching."""

from __future__ import annotations

import numpy as np

from ..core import VARIABLES, Dataset
from ..rng import derive_seed, generator
from .base import ImputationResult, ImputerKind, check_model_preconditions, finish


def covariates(d: Dataset) -> np.ndarray:
    """Fully observed covariates: maturity in years and auction-date ordinal."""
    return np.column_stack([d.maturity_years(), d.date_ordinals().astype(float)])


def visit_order(mask: np.ndarray) -> list[int]:
    """Incomplete columns by ascending missing count (ties by column order)."""
    missing = (~mask).sum(axis=0)
    return [int(j) for j in np.argsort(missing, kind="stable") if missing[j] > 0]


def design_matrix(filled: np.ndarray, extra: np.ndarray, target: int) -> np.ndarray:
    """Intercept plus standardized non-constant predictors for ``target``."""
    cols = [filled[:, k] for k in range(filled.shape[1]) if k != target]
    cols += [extra[:, k] for k in range(extra.shape[1])]
    kept = []
    for c in cols:
        sd = c.std()
        if sd > 0:
            kept.append((c - c.mean()) / sd)
    return np.column_stack([np.ones(filled.shape[0])] + kept)


def pmm_draw(
    fitted_obs: np.ndarray, y_obs: np.ndarray, fitted_mis: np.ndarray, pool: int, rng: np.random.Generator
) -> np.ndarray:
    """For each target, pick uniformly among the ``pool`` observed rows with the closest fitted value."""
    pool = min(pool, fitted_obs.size)
    out = np.empty(fitted_mis.size)
    choices = rng.integers(0, pool, size=fitted_mis.size)
    for t, f in enumerate(fitted_mis):
        nearest = np.argsort(np.abs(fitted_obs - f), kind="stable")[:pool]
        out[t] = y_obs[nearest[choices[t]]]
    return out


def _chain(values, mask, extra, order, iterations, pool, rng):
    filled = np.array(values)
    col_means = np.array([values[mask[:, j], j].mean() for j in range(values.shape[1])])
    for j in order:
        filled[~mask[:, j], j] = col_means[j]
    fallbacks = 0
    for _ in range(iterations):
        for j in order:
            obs = mask[:, j]
            X = design_matrix(filled, extra, j)
            Xo = X[obs]
            if np.linalg.matrix_rank(Xo) < X.shape[1]:
                filled[~obs, j] = col_means[j]
                fallbacks += 1
                continue
            beta, *_ = np.linalg.lstsq(Xo, values[obs, j], rcond=None)
            filled[~obs, j] = pmm_draw(Xo @ beta, values[obs, j], X[~obs] @ beta, pool, rng)
    return filled, fallbacks


def impute_mice(
    d: Dataset, iterations: int = 5, m: int = 5, seed: int = 0, pool: int = 5
) -> ImputationResult:
    """Run ``m`` independent chained-equation chains and average their fills.

    Each chain starts from column means and performs ``iterations`` sweeps.  In
    a sweep every incomplete variable (fewest gaps first) is regressed by OLS on
    the other variables plus maturity and auction date, over the rows where it
    is observed; its gaps are then refilled by predictive mean matching.  A
    rank-deficient design falls back to the column mean for that sweep.
    """
    if iterations < 1 or m < 1 or pool < 1:
        raise ValueError("iterations, m and pool must all be >= 1")
    values = np.array(d.values())
    mask = np.array(d.mask)
    if mask.all():
        return finish(d, values, mask, ImputerKind.MICE, iterations=iterations, imputations=m, mean_fallbacks=0)
    check_model_preconditions(d, "mice")
    extra = covariates(d)
    order = visit_order(mask)
    total = np.zeros_like(values)
    fallbacks = 0
    for c in range(m):
        rng = generator(derive_seed(seed, "mice-chain", c))
        filled, fb = _chain(values, mask, extra, order, iterations, pool, rng)
        total += filled
        fallbacks += fb
    imputed = total / m
    # averaging observed donors can drift by an ulp past the column range
    lo = np.array([values[mask[:, j], j].min() if mask[:, j].any() else -np.inf for j in range(values.shape[1])])
    hi = np.array([values[mask[:, j], j].max() if mask[:, j].any() else np.inf for j in range(values.shape[1])])
    imputed = np.clip(imputed, lo, hi)
    return finish(
        d,
        imputed,
        np.ones_like(mask),
        ImputerKind.MICE,
        iterations=iterations,
        imputations=m,
        pool=pool,
        visit_order=",".join(VARIABLES[j].value for j in order),
        mean_fallbacks=fallbacks,
    )
