from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..core import VARIABLES, Dataset


class ImputerKind(str, enum.Enum):
    PREVIOUS = "previous"
    NEXT = "next"
    KNN = "knn"
    MICE = "mice"
    MISSFOREST = "missforest"
    LINEAR_REGRESSION = "linear_regression"

    @classmethod
    def parse(cls, name: "str | ImputerKind") -> "ImputerKind":
        if isinstance(name, ImputerKind):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown imputation method {name!r}; valid methods: {valid}") from None


class PreconditionError(ValueError):
    """Input does not meet an imputer's stated preconditions."""


@dataclass
class ImputationResult:
    completed: Dataset
    residual_missing: int
    method: ImputerKind
    diagnostics: dict[str, Any] = field(default_factory=dict)


def finish(d: Dataset, values: np.ndarray, mask: np.ndarray, method: ImputerKind, **diagnostics) -> ImputationResult:
    # Observed cells are copied back from the input so they stay bit-identical.
    orig = d.values()
    values = np.where(d.mask, orig, values)
    mask = mask | d.mask
    completed = d if np.array_equal(mask, d.mask) else d.with_values(values, mask)
    return ImputationResult(completed, int((~mask).sum()), method, dict(diagnostics))


def check_model_preconditions(d: Dataset, name: str, min_observed: int = 3) -> None:
    observed = d.mask.sum(axis=0)
    missing = len(d) - observed
    for j, (obs, miss) in enumerate(zip(observed, missing)):
        if miss and obs < min_observed:
            raise PreconditionError(
                f"{name}: variable {VARIABLES[j].value!r} has {obs} observed cells; at least {min_observed} required"
            )
