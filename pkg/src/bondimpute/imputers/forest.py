"""Regression forest (compiled with numba) and iterative missForest imputation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from ..core import Dataset
from ..rng import derive_seed, generator
from .base import ImputationResult, ImputerKind, check_model_preconditions, finish
from .mice import covariates, visit_order


@numba.njit(cache=True)
def _build_tree(X, y, idx, feat_keys, mtry, min_leaf, feature, threshold, left, right, value):
    # idx holds the bootstrap sample and is partitioned in place
    n_nodes = 1
    stack_node = np.empty(feature.size, np.int64)
    stack_lo = np.empty(feature.size, np.int64)
    stack_hi = np.empty(feature.size, np.int64)
    top = 0
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = idx.size
    top = 1
    xs = np.empty(idx.size)
    ys = np.empty(idx.size)
    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        n = hi - lo
        total = 0.0
        for k in range(lo, hi):
            total += y[idx[k]]
        mean = total / n
        value[node] = mean
        feature[node] = -1
        if n < 2 * min_leaf:
            continue
        spread = 0.0
        for k in range(lo, hi):
            spread += (y[idx[k]] - mean) ** 2
        if spread <= 1e-14 * max(1.0, mean * mean) * n:
            continue
        candidates = np.argsort(feat_keys[node])[:mtry]
        best_score = total * total / n
        best_f = -1
        best_thr = 0.0
        for f in candidates:
            for k in range(n):
                xs[k] = X[idx[lo + k], f]
            order = np.argsort(xs[:n], kind="mergesort")
            for k in range(n):
                ys[k] = y[idx[lo + order[k]]]
            left_sum = 0.0
            for s in range(1, n):
                left_sum += ys[s - 1]
                if s < min_leaf or n - s < min_leaf:
                    continue
                a = xs[order[s - 1]]
                b = xs[order[s]]
                if not a < b:
                    continue
                right_sum = total - left_sum
                score = left_sum * left_sum / s + right_sum * right_sum / (n - s)
                if score > best_score + 1e-12 * abs(best_score):
                    best_score = score
                    best_f = f
                    thr = 0.5 * (a + b)
                    if thr >= b:
                        thr = a
                    best_thr = thr
        if best_f < 0:
            continue
        # partition idx[lo:hi] on the chosen split
        i = lo
        j = hi - 1
        while i <= j:
            if X[idx[i], best_f] <= best_thr:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack_node[top] = n_nodes
        stack_lo[top] = lo
        stack_hi[top] = i
        top += 1
        stack_node[top] = n_nodes + 1
        stack_lo[top] = i
        stack_hi[top] = hi
        top += 1
        n_nodes += 2
    return n_nodes


@numba.njit(cache=True)
def _fit_forest(X, y, boot, feat_keys, mtry, min_leaf, feature, threshold, left, right, value):
    for t in range(boot.shape[0]):
        idx = boot[t].copy()
        _build_tree(X, y, idx, feat_keys[t], mtry, min_leaf, feature[t], threshold[t], left[t], right[t], value[t])


@numba.njit(cache=True)
def _predict_forest(X, feature, threshold, left, right, value):
    out = np.zeros(X.shape[0])
    n_trees = feature.shape[0]
    for r in range(X.shape[0]):
        acc = 0.0
        for t in range(n_trees):
            node = 0
            while feature[t, node] >= 0:
                if X[r, feature[t, node]] <= threshold[t, node]:
                    node = left[t, node]
                else:
                    node = right[t, node]
            acc += value[t, node]
        out[r] = acc / n_trees
    return out


@dataclass
class RegressionForest:
    """Bagged variance-reduction regression trees with per-node random feature subsets.

    Parameters
    ----------
    n_trees : int
        Number of trees; each is grown on a bootstrap sample of the rows.
    min_leaf : int
        Minimum number of (bootstrap) samples in a leaf.
    max_features : int or None
        Features tried per split; ``None`` means ``ceil(sqrt(p))``.
    """

    n_trees: int = 100
    min_leaf: int = 5
    max_features: int | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> "RegressionForest":
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        n, p = X.shape
        mtry = self.max_features or math.ceil(math.sqrt(p))
        mtry = max(1, min(mtry, p))
        max_nodes = 2 * (n // self.min_leaf) + 3
        boot = rng.integers(0, n, size=(self.n_trees, n))
        keys = rng.random((self.n_trees, max_nodes, p))
        self.feature_ = np.full((self.n_trees, max_nodes), -1, dtype=np.int64)
        self.threshold_ = np.zeros((self.n_trees, max_nodes))
        self.left_ = np.zeros((self.n_trees, max_nodes), dtype=np.int64)
        self.right_ = np.zeros((self.n_trees, max_nodes), dtype=np.int64)
        self.value_ = np.zeros((self.n_trees, max_nodes))
        _fit_forest(
            X, y, boot, keys, mtry, self.min_leaf, self.feature_, self.threshold_, self.left_, self.right_, self.value_
        )
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _predict_forest(X, self.feature_, self.threshold_, self.left_, self.right_, self.value_)


def impute_missforest(
    d: Dataset, trees: int = 100, seed: int = 0, max_iter: int = 10, min_leaf: int = 5
) -> ImputationResult:
    """Iterative random-forest imputation.

    Gaps start at column means.  Each round refits a forest per incomplete
    variable (fewest gaps first) on the rows observing it, using the other
    variables plus maturity and auction date as predictors, and re-predicts
    its gaps.  Iteration stops at the first round whose summed normalized
    squared change does not decrease, returning the fill from the round before.
    """
    values = np.array(d.values())
    mask = np.array(d.mask)
    if mask.all():
        return finish(d, values, mask, ImputerKind.MISSFOREST, rounds=0, trees=trees)
    check_model_preconditions(d, "missforest")
    extra = covariates(d)
    # constant covariates (e.g. a single maturity) can never split a node
    extra = extra[:, extra.std(axis=0) > 0]
    order = visit_order(mask)
    col_means = np.array([values[mask[:, j], j].mean() for j in range(values.shape[1])])
    current = np.array(values)
    for j in order:
        current[~mask[:, j], j] = col_means[j]

    prev_change = math.inf
    fallbacks = 0
    rounds = 0
    stopped_early = False
    for it in range(max_iter):
        before = current.copy()
        for j in order:
            obs = mask[:, j]
            if obs.sum() < min_leaf:
                current[~obs, j] = col_means[j]
                fallbacks += 1
                continue
            others = [k for k in range(current.shape[1]) if k != j]
            feats = np.column_stack([current[:, others], extra])
            forest = RegressionForest(trees, min_leaf).fit(
                feats[obs], values[obs, j], generator(derive_seed(seed, "missforest", it, j))
            )
            current[~obs, j] = forest.predict(feats[~obs])
        rounds += 1
        change = 0.0
        for j in order:
            denom = float(current[:, j] @ current[:, j])
            delta = current[:, j] - before[:, j]
            change += float(delta @ delta) / denom if denom > 0 else float(delta @ delta)
        if change >= prev_change:
            current = before
            stopped_early = True
            break
        prev_change = change
    return finish(
        d,
        current,
        np.ones_like(mask),
        ImputerKind.MISSFOREST,
        trees=trees,
        rounds=rounds,
        returned_round=rounds - 1 if stopped_early else rounds,
        mean_fallbacks=fallbacks,
    )
