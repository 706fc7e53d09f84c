"""Error scoring and the summaries used to compare imputers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable, Sequence

import numpy as np

from .core import Dataset, Variable
from .masking import MaskPlan


class EmptyScoreSetError(ValueError):
    pass


class ResidualMissingError(ValueError):
    pass


@dataclass(frozen=True)
class MaeScore:
    variable: Variable
    value: float
    n_cells: int


@dataclass(frozen=True)
class NormalityTestResult:
    w_statistic: float
    p_value: float
    n: int
    verdict: bool


@dataclass(frozen=True)
class BoxplotSummary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]


def mae(truth: Dataset, completed: Dataset, cells: MaskPlan, variable: Variable) -> MaeScore:
    """Mean absolute error over the planned cells of ``variable`` only."""
    if len(truth) != len(completed):
        raise ValueError(f"shape mismatch: truth has {len(truth)} records, completed has {len(completed)}")
    j = variable.column
    rows = [i for i, v in cells.cells if v is variable]
    if not rows:
        raise EmptyScoreSetError(f"empty score set for {variable.value}")
    tv, cv = truth.values(), completed.values()
    total = 0.0
    for i in rows:
        if not completed.mask[i, j]:
            raise ResidualMissingError(f"residual missingness in scored cell (record {i}, {variable.value})")
        if not truth.mask[i, j]:
            raise ValueError(f"truth is missing scored cell (record {i}, {variable.value})")
        total += abs(cv[i, j] - tv[i, j])
    return MaeScore(variable, float(total) / len(rows), len(rows))


# Royston (1995) AS R94 polynomial coefficients, lowest order first.
_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)

_STD_NORMAL = NormalDist()


def _poly(coefs: Sequence[float], x: float) -> float:
    out = 0.0
    for c in reversed(coefs):
        out = out * x + c
    return out


def shapiro_coefficients(n: int) -> np.ndarray:
    """Antisymmetric Shapiro-Wilk weights for a sorted sample of size ``n`` (unit norm)."""
    if n < 3:
        raise ValueError(f"Shapiro-Wilk needs n >= 3, got {n}")
    half = n // 2
    a = np.zeros(half)
    if n == 3:
        a[0] = math.sqrt(0.5)
    else:
        m = np.array([-_STD_NORMAL.inv_cdf((i - 0.375) / (n + 0.25)) for i in range(1, half + 1)])
        summ2 = 2.0 * float(m @ m)
        ssumm2 = math.sqrt(summ2)
        rsn = 1.0 / math.sqrt(n)
        a1 = _poly(_C1, rsn) + m[0] / ssumm2
        if n > 5:
            a2 = m[1] / ssumm2 + _poly(_C2, rsn)
            fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1**2 - 2 * a2**2))
            a[:] = m / fac
            a[0], a[1] = a1, a2
        else:
            fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1**2))
            a[:] = m / fac
            a[0] = a1
    full = np.zeros(n)
    full[:half] = -a
    full[n - half :] = a[::-1]
    return full


def _shapiro_pvalue(w: float, n: int) -> float:
    if n == 3:
        # exact null distribution for n = 3
        p = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.pi / 3.0)
        return min(1.0, max(0.0, p))
    w1 = 1.0 - w
    if w1 <= 0.0:
        return 1.0
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return 1e-99
        y = -math.log(gamma - y)
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        ln = math.log(n)
        mu = _poly(_C5, ln)
        sigma = math.exp(_poly(_C6, ln))
    return 0.5 * math.erfc((y - mu) / (sigma * math.sqrt(2.0)))


def shapiro_wilk(sample: Iterable[float], alpha: float = 0.05) -> NormalityTestResult:
    """Shapiro-Wilk W and p-value via Royston's AS R94 approximation (3 <= n <= 5000).

    ``verdict`` is ``p > alpha``: True means normality is not rejected.
    """
    x = np.sort(np.asarray(list(sample), dtype=float))
    n = x.size
    if n < 3 or n > 5000:
        raise ValueError(f"Shapiro-Wilk requires 3 <= n <= 5000, got n = {n}")
    if not np.isfinite(x).all():
        raise ValueError("sample contains non-finite values")
    rng = x[-1] - x[0]
    if rng <= 0 or rng < 1e-19 * max(1.0, abs(x[0])):
        raise ValueError("degenerate sample: zero variance")
    a = shapiro_coefficients(n)
    # shift before scaling so a large common offset cannot cost precision
    xc = x - x[0]
    xc = (xc - xc.mean()) / rng
    ac = a - a.mean()
    ssa = float(ac @ ac)
    ssx = float(xc @ xc)
    sax = float(ac @ xc)
    root = math.sqrt(ssa * ssx)
    # 1 - W as a difference of squares keeps precision when W is close to 1
    w1 = (root - sax) * (root + sax) / (ssa * ssx)
    w = 1.0 - w1
    p = _shapiro_pvalue(w, n)
    return NormalityTestResult(w, p, n, p > alpha)


def quantile(sorted_x: np.ndarray, q: float) -> float:
    """Linear interpolation between order statistics at position ``q * (n - 1)``."""
    n = sorted_x.size
    h = q * (n - 1)
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    return float(sorted_x[lo] + (h - lo) * (sorted_x[hi] - sorted_x[lo]))


def boxplot_summary(sample: Iterable[float]) -> BoxplotSummary:
    """Five-number summary with Tukey whiskers (1.5 x IQR) and the points beyond them."""
    x = np.sort(np.asarray(list(sample), dtype=float))
    if x.size == 0:
        raise ValueError("boxplot_summary of an empty sample")
    q1, med, q3 = quantile(x, 0.25), quantile(x, 0.5), quantile(x, 0.75)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    outliers = tuple(float(v) for v in x[(x < lo_fence) | (x > hi_fence)])
    # an interpolated quartile can lie beyond every in-fence point; the whisker then sits on the box
    lo_whisker = min(float(inside.min()), q1)
    hi_whisker = max(float(inside.max()), q3)
    return BoxplotSummary(float(x[0]), q1, med, q3, float(x[-1]), lo_whisker, hi_whisker, outliers)
