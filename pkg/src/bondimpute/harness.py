"""Repeated mask / impute / score trials and their aggregation into reports.

Every repetition draws one MCAR mask that all methods share.  Seeds for the
mask and for each method come from keyed substreams of the master seed, so a
repetition's results do not depend on which other repetitions ran, or on
how the work was scheduled across processes.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import __version__
from .core import VARIABLES, Dataset, MaskConfig, Variable
from .data_io import RunConfig
from .imputers import ImputationResult, ImputerKind, carry, impute
from .masking import MaskPlan, apply_mask, plan_mcar
from .rng import RNG_ALGORITHM, derive_seed
from .stats import BoxplotSummary, MaeScore, NormalityTestResult, boxplot_summary, mae, shapiro_wilk

REPORT_FILES = ("normality_table.csv", "boxplots.csv", "trials.csv", "run_manifest.txt")


class TrialError(RuntimeError):
    def __init__(self, repetition: int, method: str, cause: BaseException):
        self.repetition = repetition
        self.method = method
        self.cause = cause
        super().__init__(f"repetition {repetition}, method {method}: {cause}")


@dataclass(frozen=True)
class TrialResult:
    repetition: int
    method: ImputerKind
    scores: dict[Variable, MaeScore]
    seed_used: int
    fallback_count: int


@dataclass(frozen=True)
class CellSummary:
    """Aggregate over repetitions for one (method, variable) pair."""

    normality: Optional[NormalityTestResult]
    boxplot: BoxplotSummary
    note: str = ""


@dataclass
class BenchmarkReport:
    config: RunConfig
    trials: list[TrialResult]
    cells: dict[tuple[ImputerKind, Variable], CellSummary]
    provenance: dict[str, str] = field(default_factory=dict)

    def mae_sample(self, method: ImputerKind, variable: Variable) -> list[float]:
        return [t.scores[variable].value for t in self.trials if t.method is method]


def backstop(d: Dataset, result: ImputationResult) -> tuple[Dataset, int]:
    """Fill leftover gaps with the opposite carry direction.

    ``previous`` is backed by next-value fills; every other method (whose
    leftovers can only be series starts) by next-value first, then previous.
    """
    completed = result.completed
    if result.residual_missing == 0:
        return completed, 0
    groups = list(completed.maturity_groups().values())
    values, mask = completed.values(), completed.mask
    directions = [False] if result.method is ImputerKind.NEXT else [True, False]
    filled = 0
    for backward in directions:
        values, mask, n = carry(values, mask, groups, backward=backward)
        filled += n
    return completed.with_values(values, mask), filled


def run_trial(d: Dataset, cfg: RunConfig, repetition: int) -> list[TrialResult]:
    """One repetition: draw a mask, run every configured method on it, score each."""
    mask_seed = derive_seed(cfg.seed, "mask", repetition)
    try:
        plan = plan_mcar(d, MaskConfig(cfg.missing_rate, mask_seed))
        masked, truth = apply_mask(d, plan)
    except Exception as exc:
        raise TrialError(repetition, "mask", exc) from exc
    out = []
    for name in cfg.methods:
        kind = ImputerKind.parse(name)
        seed = derive_seed(cfg.seed, "method", repetition, kind.value)
        try:
            result = impute(
                masked,
                kind,
                seed,
                knn_k=cfg.knn_k,
                mice_iterations=cfg.mice_iterations,
                mice_imputations=cfg.mice_imputations,
                forest_trees=cfg.forest_trees,
            )
            completed, n_backstop = backstop(masked, result)
            scores = {v: mae(truth, completed, plan, v) for v in VARIABLES}
        except Exception as exc:
            raise TrialError(repetition, kind.value, exc) from exc
        out.append(TrialResult(repetition, kind, scores, seed, n_backstop))
    return out


def _trial_batch(args) -> list[TrialResult]:
    d, cfg, reps = args
    out = []
    for r in reps:
        out.extend(run_trial(d, cfg, r))
    return out


def aggregate(trials: Sequence[TrialResult], cfg: RunConfig) -> dict[tuple[ImputerKind, Variable], CellSummary]:
    cells = {}
    for name in cfg.methods:
        kind = ImputerKind.parse(name)
        for v in VARIABLES:
            sample = [t.scores[v].value for t in trials if t.method is kind]
            note = ""
            try:
                normality: Optional[NormalityTestResult] = shapiro_wilk(sample, cfg.alpha)
            except ValueError as exc:
                normality, note = None, str(exc)
            cells[(kind, v)] = CellSummary(normality, boxplot_summary(sample), note)
    return cells


def run_benchmark(d: Dataset, cfg: RunConfig, workers: int = 1) -> BenchmarkReport:
    """Run ``cfg.repetitions`` paired trials and summarize each (method, variable) MAE sample.

    Output is identical for any ``workers`` count.
    """
    reps = list(range(cfg.repetitions))
    if workers <= 1 or len(reps) < 2:
        trials = _trial_batch((d, cfg, reps))
    else:
        workers = min(workers, len(reps))
        batches = [reps[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_trial_batch, [(d, cfg, b) for b in batches]))
        trials = [t for part in parts for t in part]
    order = {name: i for i, name in enumerate(cfg.methods)}
    trials.sort(key=lambda t: (t.repetition, order[t.method.value]))
    provenance = {
        "rng_algorithm": RNG_ALGORITHM,
        "master_seed": str(cfg.seed),
        "records": str(len(d)),
        "package_version": __version__,
    }
    return BenchmarkReport(cfg, trials, aggregate(trials, cfg), provenance)


def rank_methods(rep: BenchmarkReport, variable: "Variable | str") -> list[tuple[str, float]]:
    """Methods by ascending median MAE for ``variable``; ties broken alphabetically."""
    variable = Variable.parse(variable) if isinstance(variable, str) else variable
    rows = [(kind.value, cell.boxplot.median) for (kind, v), cell in rep.cells.items() if v is variable]
    return sorted(rows, key=lambda r: (r[1], r[0]))


def _fmt(x: Optional[float]) -> str:
    return "NA" if x is None else repr(float(x))


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def report_texts(rep: BenchmarkReport) -> dict[str, str]:
    """File name -> exact content for every report file."""
    normality_rows, box_rows = [], []
    for (kind, v), cell in rep.cells.items():
        nt = cell.normality
        normality_rows.append(
            [
                kind.value,
                v.value,
                len(rep.mae_sample(kind, v)),
                _fmt(nt.w_statistic if nt else None),
                _fmt(nt.p_value if nt else None),
                ("normal" if nt.verdict else "non-normal") if nt else "NA",
                cell.note,
            ]
        )
        b = cell.boxplot
        box_rows.append(
            [kind.value, v.value]
            + [_fmt(x) for x in (b.min, b.q1, b.median, b.q3, b.max, b.whisker_low, b.whisker_high)]
            + [";".join(_fmt(o) for o in b.outliers)]
        )
    trial_rows = []
    for t in rep.trials:
        row: list[object] = [t.repetition, t.method.value, t.seed_used]
        for v in VARIABLES:
            row += [_fmt(t.scores[v].value), t.scores[v].n_cells]
        row.append(t.fallback_count)
        trial_rows.append(row)
    manifest = rep.config.to_text() + "".join(f"{k} = {val}\n" for k, val in rep.provenance.items())
    return {
        "normality_table.csv": _csv_text(
            ["method", "variable", "n", "w_statistic", "p_value", "verdict", "note"], normality_rows
        ),
        "boxplots.csv": _csv_text(
            ["method", "variable", "min", "q1", "median", "q3", "max", "whisker_low", "whisker_high", "outliers"],
            box_rows,
        ),
        "trials.csv": _csv_text(
            ["repetition", "method", "seed"]
            + [f"{v.value}_{col}" for v in VARIABLES for col in ("mae", "cells")]
            + ["fallback_count"],
            trial_rows,
        ),
        "run_manifest.txt": manifest,
    }


def emit_report(rep: BenchmarkReport, directory: Union[str, Path]) -> list[Path]:
    """Write the four report files into ``directory`` (created if needed)."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in report_texts(rep).items():
            path = directory / name
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write report to {directory}: {exc}") from exc
    return written


def format_normality_table(rows: Sequence[tuple[str, str, Optional[float], str]]) -> str:
    """Aligned ``method  variable  p-value  verdict`` table; p-values to 4 decimals."""
    header = ("Method", "Variable", "p-value", "Verdict")
    body = [(m, v, "NA" if p is None else f"{p:.4f}", verdict) for m, v, p, verdict in rows]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(4)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in body]
    return "\n".join(lines)


def normality_rows(rep: BenchmarkReport) -> list[tuple[str, str, Optional[float], str]]:
    out = []
    for (kind, v), cell in rep.cells.items():
        nt = cell.normality
        out.append((kind.value, v.value, nt.p_value if nt else None, ("normal" if nt.verdict else "non-normal") if nt else "NA"))
    return out


def load_report(directory: Union[str, Path]) -> dict[str, list[dict[str, str]]]:
    """Read the CSV tables of an emitted report back as row dictionaries."""
    directory = Path(directory)
    out = {}
    for name in ("normality_table.csv", "boxplots.csv", "trials.csv"):
        with open(directory / name, newline="", encoding="utf-8") as fh:
            out[name] = list(csv.DictReader(fh))
    return out


def default_workers() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))
