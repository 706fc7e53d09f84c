"""The six gap-filling methods behind one dispatch function."""

from __future__ import annotations

from ..core import Dataset
from .base import ImputationResult, ImputerKind, PreconditionError
from .fill import carry, impute_next, impute_previous
from .forest import RegressionForest, impute_missforest
from .knn import KnnConfig, impute_knn
from .mice import impute_mice
from .regression import impute_linear_regression

__all__ = [
    "ImputationResult",
    "ImputerKind",
    "KnnConfig",
    "PreconditionError",
    "RegressionForest",
    "carry",
    "impute",
    "impute_knn",
    "impute_linear_regression",
    "impute_mice",
    "impute_missforest",
    "impute_next",
    "impute_previous",
]


def impute(
    d: Dataset,
    kind: "ImputerKind | str",
    seed: int = 0,
    *,
    knn_k: int = 10,
    mice_iterations: int = 5,
    mice_imputations: int = 5,
    forest_trees: int = 100,
) -> ImputationResult:
    """Run the imputer named by ``kind``. Unknown names raise ``ValueError`` listing the valid ones."""
    kind = ImputerKind.parse(kind)
    if kind is ImputerKind.PREVIOUS:
        return impute_previous(d)
    if kind is ImputerKind.NEXT:
        return impute_next(d)
    if kind is ImputerKind.KNN:
        return impute_knn(d, KnnConfig(knn_k))
    if kind is ImputerKind.MICE:
        return impute_mice(d, mice_iterations, mice_imputations, seed)
    if kind is ImputerKind.MISSFOREST:
        return impute_missforest(d, forest_trees, seed)
    return impute_linear_regression(d)
