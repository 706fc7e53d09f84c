"""``bondimpute`` command line: synth, mask, impute, benchmark, curve, inspect.

Exit codes: 0 success, 2 usage or validation failure, 1 I/O or other
environment failure.  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

from . import bundled_path
from .core import MaskConfig, Variable
from .curve import ArbitrageError, IncompleteSeriesError, bootstrap, instruments_from_dataset, repricing_errors, write_curve
from .data_io import ConfigError, DataFormatError, RunConfig, read_config, read_dataset, write_dataset
from .harness import (
    TrialError,
    default_workers,
    emit_report,
    format_normality_table,
    load_report,
    normality_rows,
    run_benchmark,
)
from .imputers import ImputerKind, PreconditionError, impute
from .masking import IncompleteDatasetError, apply_mask, plan_mcar, write_plan
from .synth import synthetic_panel

EXIT_OK, EXIT_IO, EXIT_USAGE = 0, 1, 2


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _read(path: str):
    if path.startswith("bundled:"):
        path = str(bundled_path(path.split(":", 1)[1]))
    try:
        return read_dataset(path)
    except DataFormatError as exc:
        raise _Fail(EXIT_USAGE, f"{path}: {exc}") from exc
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from exc


def _config(path: Optional[str], seed: Optional[int] = None) -> RunConfig:
    if path is None:
        return RunConfig(seed=0 if seed is None else seed)
    try:
        cfg = read_config(path)
    except ConfigError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from exc
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def _write(fn, *args, path) -> None:
    try:
        fn(*args, path)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_synth(args) -> int:
    if args.rows < 1:
        raise _Fail(EXIT_USAGE, f"--rows must be >= 1, got {args.rows}")
    _write(write_dataset, synthetic_panel(args.rows, args.seed), path=args.out)
    return EXIT_OK


def cmd_mask(args) -> int:
    d = _read(args.input)
    try:
        cfg = MaskConfig(args.rate, args.seed)
        plan = plan_mcar(d, cfg)
    except (IncompleteDatasetError, ValueError) as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc
    masked, _ = apply_mask(d, plan)
    _write(write_dataset, masked, path=args.out_masked)
    _write(write_plan, plan, path=args.out_plan)
    print(f"hidden cells: {len(plan)}")
    return EXIT_OK


def cmd_impute(args) -> int:
    try:
        kind = ImputerKind.parse(args.method)
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc
    cfg = _config(args.config, args.seed)
    d = _read(args.input)
    try:
        result = impute(
            d,
            kind,
            cfg.seed,
            knn_k=cfg.knn_k,
            mice_iterations=cfg.mice_iterations,
            mice_imputations=cfg.mice_imputations,
            forest_trees=cfg.forest_trees,
        )
    except (PreconditionError, ValueError) as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc
    _write(write_dataset, result.completed, path=args.out)
    sidecar = Path(str(args.out) + ".diagnostics.json")
    payload = {"method": kind.value, "seed": cfg.seed, "residual_missing": result.residual_missing}
    payload.update(result.diagnostics)
    try:
        sidecar.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {sidecar}: {exc.strerror or exc}") from exc
    print(f"residual_missing: {result.residual_missing}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = _config(args.config)
    d = _read(args.input)
    workers = args.workers if args.workers is not None else default_workers()
    try:
        rep = run_benchmark(d, cfg, workers=workers)
    except TrialError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc
    try:
        emit_report(rep, args.out_dir)
    except OSError as exc:
        raise _Fail(EXIT_IO, str(exc)) from exc
    print(format_normality_table(normality_rows(rep)))
    return EXIT_OK


def cmd_curve(args) -> int:
    d = _read(args.input)
    dates = d.dates()
    if not dates:
        raise _Fail(EXIT_USAGE, "incomplete series: input has no records")
    if args.date is not None:
        try:
            when = date.fromisoformat(args.date)
        except ValueError as exc:
            raise _Fail(EXIT_USAGE, f"--date: {exc}") from exc
        if when not in dates:
            raise _Fail(EXIT_USAGE, f"no auctions on {when}")
        dates = [when]
    section = d.cross_section(dates[-1])
    instruments = instruments_from_dataset(section)
    try:
        curve = bootstrap(instruments)
    except IncompleteSeriesError as exc:
        raise _Fail(
            EXIT_USAGE, f"{exc} (auction date {dates[-1]}); run `bondimpute impute` to fill gaps before bootstrapping"
        ) from exc
    except (ArbitrageError, ValueError) as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from exc
    _write(write_curve, curve, path=args.out)
    err = max(repricing_errors(curve, instruments))
    print(f"curve date: {dates[-1]}  nodes: {len(curve.points)}")
    print(f"max repricing error: {err:.3e}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    try:
        tables = load_report(args.dir)
    except (OSError, KeyError) as exc:
        raise _Fail(EXIT_IO, f"cannot read report in {args.dir}: {exc}") from exc
    rows = []
    for r in tables["normality_table.csv"]:
        p = None if r["p_value"] == "NA" else float(r["p_value"])
        rows.append((r["method"], r["variable"], p, r["verdict"]))
    print(format_normality_table(rows))
    medians: dict[str, list[tuple[float, str]]] = {}
    for r in tables["boxplots.csv"]:
        medians.setdefault(r["variable"], []).append((float(r["median"]), r["method"]))
    for v in Variable:
        if v.value not in medians:
            continue
        ranked = sorted(medians[v.value])
        print(f"\n{v.value} by median MAE: " + ", ".join(f"{m} ({x:.4f})" for x, m in ranked))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bondimpute", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="write a complete synthetic auction panel")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mask", help="hide an exact MCAR fraction of a complete panel")
    p.add_argument("--input", required=True)
    p.add_argument("--rate", type=float, default=0.35)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-masked", required=True)
    p.add_argument("--out-plan", required=True)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("impute", help="fill gaps with one of the six methods")
    p.add_argument("--input", required=True)
    p.add_argument("--method", required=True, help=", ".join(k.value for k in ImputerKind))
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("benchmark", help="run the repeated mask/impute/score protocol")
    p.add_argument("--input", required=True)
    p.add_argument("--config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, help="worker processes (default: all CPUs); output does not depend on it")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("curve", help="bootstrap a zero curve from one auction date's cross-section")
    p.add_argument("--input", required=True)
    p.add_argument("--date", help="auction date (YYYY-MM-DD); default: the latest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("inspect", aliases=["report-inspect"], help="print an emitted benchmark report")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"bondimpute {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
