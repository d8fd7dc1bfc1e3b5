"""Outer-fold experiment driver comparing nonconformity selection, grid
cross-validation and the max-distance predictor on identical splits."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .baselines import LINF_MEASURES, GridSpec, cross_validation_select, linf_choose, train_grid
from .conformal import build_score_table, decide_batch
from .dataset import (Dataset, SplitError, SplitSpec, load_csv, make_folds, preprocess,
                      split_train_validation, standardize)
from .svm import SvmError

log = logging.getLogger(__name__)

STRATEGIES = ("nonconformity", "cv", "linf")
SUMMARY_HEADER = ("dataset", "strategy", "mean_error", "std", "wall_seconds")
CURVE_HEADER = ("bound", "cumulative_error")
MAX_SPLIT_ATTEMPTS = 100


@dataclass(frozen=True)
class ExperimentConfig:
    data_path: str
    grid: GridSpec = field(default_factory=GridSpec)
    outer_folds: int = 10
    inner_cv_folds: int = 10
    delta: float = 0.05
    seed: int = 0
    strategies: tuple = STRATEGIES
    jobs: int = 1
    tol: float = 1e-3
    linf_measure: str = "geometric"

    def __post_init__(self):
        strategies = tuple(self.strategies)
        if not strategies:
            raise ValueError("at least one strategy is required")
        unknown = set(strategies) - set(STRATEGIES)
        if unknown:
            raise ValueError(f"unknown strategies: {sorted(unknown)}")
        object.__setattr__(self, "strategies", tuple(s for s in STRATEGIES if s in strategies))
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.outer_folds < 2 or self.inner_cv_folds < 2:
            raise ValueError("fold counts must be at least 2")
        if self.linf_measure not in LINF_MEASURES:
            raise ValueError(f"linf_measure must be one of {LINF_MEASURES}")

    def to_dict(self) -> dict:
        return {
            "data_path": str(self.data_path),
            "C_values": list(self.grid.C_values),
            "gamma_values": list(self.grid.gamma_values),
            "outer_folds": self.outer_folds,
            "inner_cv_folds": self.inner_cv_folds,
            "delta": self.delta,
            "seed": self.seed,
            "strategies": list(self.strategies),
            "tol": self.tol,
            "linf_measure": self.linf_measure,
        }


@dataclass
class StrategyResult:
    mean_error: float
    std: float
    wall_seconds: float
    fold_errors: list
    trained_models: int
    nonconverged: int


@dataclass
class ExperimentReport:
    dataset: str
    config: dict
    n_samples: int
    strategies: dict          # name -> StrategyResult as dict
    folds: list               # per-fold bookkeeping
    records: list             # per-test-point nonconformity records
    curve: list               # [bound, cumulative_error] pairs
    pooled_error: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(**d)


@dataclass(frozen=True)
class BoundCurve:
    points: list  # (bound, mean error over records with bound <= it)

    @property
    def bounds(self) -> list:
        return [b for b, _ in self.points]


def bound_curve(records: Sequence) -> BoundCurve:
    """Cumulative mean error at each distinct bound value, ascending.

    ``records`` holds ``(bound, error)`` pairs or mappings with ``bound``
    and ``error`` keys; error is 0 or 1.
    """
    if len(records) == 0:
        raise ValueError("no records")
    if isinstance(records[0], dict):
        pairs = [(r["bound"], r["error"]) for r in records]
    else:
        pairs = list(records)
    bounds = np.array([p[0] for p in pairs], dtype=np.float64)
    errors = np.array([p[1] for p in pairs], dtype=np.int64)
    distinct, inverse = np.unique(bounds, return_inverse=True)
    err_at = np.bincount(inverse, weights=errors, minlength=distinct.size).astype(np.int64)
    n_at = np.bincount(inverse, minlength=distinct.size)
    cum_err = np.cumsum(err_at)
    cum_n = np.cumsum(n_at)
    return BoundCurve([(float(b), int(e) / int(n)) for b, e, n in zip(distinct, cum_err, cum_n)])


def _std(values) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


# stream ids keep split seeds and inner-fold seeds independent
_SPLIT_STREAM, _CV_STREAM = 0, 1


def _derive_seed(*keys: int) -> int:
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


def _split(rest: Dataset, seed: int, fold: int):
    for attempt in range(MAX_SPLIT_ATTEMPTS):
        s = _derive_seed(seed, _SPLIT_STREAM, fold, attempt)
        try:
            return split_train_validation(rest, SplitSpec(seed=s)), s
        except SplitError as exc:
            log.info("fold %d: %s; retrying with next seed", fold, exc)
    raise SplitError(f"fold {fold}: no admissible train/validation split")


@dataclass
class _Outcome:
    predictions: np.ndarray
    seconds: float
    trained: int
    nonconverged: int
    hashes: dict
    extra: dict = field(default_factory=dict)


@dataclass
class _GridStage:
    models: list
    fvals: np.ndarray   # (K, T) decision values on the test points
    seconds: float      # training plus test-point evaluation
    hashes: dict


def _hashes(train: Dataset, test: Dataset) -> dict:
    return {"train": train.content_hash(), "test": test.content_hash()}


def _grid_stage(train: Dataset, test: Dataset, config: ExperimentConfig) -> _GridStage:
    t0 = time.perf_counter()
    models = train_grid(train, config.grid, config.tol, config.jobs)
    fvals = np.vstack([m.decision_values(test.X) for m in models])
    return _GridStage(models, fvals, time.perf_counter() - t0, _hashes(train, test))


def _run_nonconformity(stage: _GridStage, val: Dataset, test: Dataset, fold: int,
                       config: ExperimentConfig) -> _Outcome:
    t0 = time.perf_counter()
    table = build_score_table(stage.models, val)
    seeds = [[config.seed, fold, t] for t in range(len(test))]
    decisions = decide_batch(table, stage.fvals, seeds, config.delta)
    pred = np.array([d.predicted_label for d in decisions])
    seconds = stage.seconds + time.perf_counter() - t0
    return _Outcome(pred, seconds, len(stage.models),
                    sum(not m.converged for m in stage.models), stage.hashes,
                    {"decisions": decisions})


def _run_linf(stage: _GridStage, test: Dataset, measure: str) -> _Outcome:
    t0 = time.perf_counter()
    pred, _ = linf_choose(stage.fvals, np.array([m.w_norm_sq for m in stage.models]), measure)
    seconds = stage.seconds + time.perf_counter() - t0
    return _Outcome(pred, seconds, len(stage.models),
                    sum(not m.converged for m in stage.models), stage.hashes)


def _run_cv(train: Dataset, test: Dataset, fold: int, config: ExperimentConfig) -> _Outcome:
    t0 = time.perf_counter()
    inner = make_folds(train, config.inner_cv_folds, _derive_seed(config.seed, _CV_STREAM, fold))
    sel = cross_validation_select(train, config.grid, inner, config.tol, config.jobs)
    pred = sel.model.predict(test.X)
    seconds = time.perf_counter() - t0
    return _Outcome(pred, seconds, sel.n_trained, int(not sel.model.converged),
                    _hashes(train, test),
                    {"cv_choice": {"C": sel.best_C, "gamma": sel.best_gamma,
                                   "skipped_inner_folds": list(sel.skipped)}})


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Outer ``b``-fold protocol; every strategy sees the same training and
    test samples within a fold, and the validation split is used only for
    nonconformity scores."""
    data = preprocess(load_csv(config.data_path))
    outer = make_folds(data, config.outer_folds, config.seed)
    wanted = config.strategies
    fold_errors = {s: [] for s in wanted}
    wall = {s: 0.0 for s in wanted}
    trained = {s: 0 for s in wanted}
    nonconverged = {s: 0 for s in wanted}
    records, folds = [], []

    for f in range(config.outer_folds):
        test_idx = outer.fold(f)
        info = {"fold": f, "n_test": int(test_idx.size), "skipped": False}
        try:
            (train, val), split_seed = _split(data.subset(outer.complement(f)), config.seed, f)
            train, (val, test) = standardize(train, [val, data.subset(test_idx)])
            info.update(split_seed=split_seed, n_train=len(train), n_validation=len(val))
            outcomes = {}
            if "nonconformity" in wanted or "linf" in wanted:
                stage = _grid_stage(train, test, config)
                if "nonconformity" in wanted:
                    outcomes["nonconformity"] = _run_nonconformity(stage, val, test, f, config)
                if "linf" in wanted:
                    outcomes["linf"] = _run_linf(stage, test, config.linf_measure)
            if "cv" in wanted:
                outcomes["cv"] = _run_cv(train, test, f, config)
        except (SplitError, SvmError) as exc:
            log.warning("fold %d skipped for every strategy: %s", f, exc)
            info.update(skipped=True, reason=str(exc))
            folds.append(info)
            continue

        info["hashes"] = {s: o.hashes for s, o in outcomes.items()}
        info["errors"] = {}
        info["trained_models"] = {}
        for s, o in outcomes.items():
            err = float(np.mean(o.predictions != test.y))
            fold_errors[s].append(err)
            wall[s] += o.seconds
            trained[s] += o.trained
            nonconverged[s] += o.nonconverged
            info["errors"][s] = err
            info["trained_models"][s] = o.trained
        if "nonconformity" in outcomes and "cv" in outcomes:
            info["training_ratio"] = outcomes["cv"].trained / outcomes["nonconformity"].trained
        if "cv" in outcomes:
            info.update(outcomes["cv"].extra)
        if "nonconformity" in outcomes:
            records.extend(
                {"fold": f, "index": int(i), "truth": int(y), "prediction": d.predicted_label,
                 "error": int(d.predicted_label != y), "epsilon_crit": d.epsilon_crit,
                 "bound": d.bound, "k_crit": d.k_crit, "y_crit": d.y_crit,
                 "tie_count": d.tie_count}
                for i, y, d in zip(test_idx, test.y, outcomes["nonconformity"].extra["decisions"]))
        log.info("fold %d: %s", f, info["errors"])
        folds.append(info)

    if not any(fold_errors[s] for s in wanted):
        raise RuntimeError("every outer fold was skipped")
    strategies = {
        s: asdict(StrategyResult(mean_error=float(np.mean(fold_errors[s])), std=_std(fold_errors[s]),
                                 wall_seconds=wall[s], fold_errors=fold_errors[s],
                                 trained_models=trained[s], nonconverged=nonconverged[s]))
        for s in wanted}
    curve, pooled = [], None
    if records:
        curve = [list(p) for p in bound_curve(records).points]
        pooled = sum(r["error"] for r in records) / len(records)
    return ExperimentReport(dataset=Path(config.data_path).stem, config=config.to_dict(),
                            n_samples=len(data), strategies=strategies, folds=folds,
                            records=records, curve=curve, pooled_error=pooled)


def emit_report(report: ExperimentReport, out_dir, fmt: str = "json") -> list[Path]:
    """Write ``report.json`` (fmt="json") or ``summary.csv`` plus
    ``curve.csv`` (fmt="csv") into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out / "report.json"
        with open(path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")
        return [path]
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    summary, curve = out / "summary.csv", out / "curve.csv"
    with open(summary, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for name, res in report.strategies.items():
            w.writerow([report.dataset, name, repr(res["mean_error"]), repr(res["std"]),
                        f"{res['wall_seconds']:.6f}"])
    with open(curve, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for b, e in report.curve:
            w.writerow([repr(b), repr(e)])
    return [summary, curve]


def load_report(path) -> ExperimentReport:
    with open(path) as fh:
        return ExperimentReport.from_dict(json.load(fh))


def _parse_value(token: str) -> float:
    token = token.strip()
    if "^" in token:
        base, exp = token.split("^", 1)
        return float(base) ** float(exp)
    return float(token)


def parse_grid_file(path) -> GridSpec:
    """Read ``C = ...`` and ``gamma = ...`` lines (comma-separated values,
    ``2^k`` allowed, ``#`` comments). Missing keys keep their defaults."""
    values: dict[str, tuple] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, rhs = (s.strip() for s in line.split("=", 1))
            if key not in ("C", "gamma"):
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = tuple(_parse_value(t) for t in rhs.split(",") if t.strip())
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad numeric value in {rhs!r}") from None
    default = GridSpec()
    return GridSpec(values.get("C", default.C_values), values.get("gamma", default.gamma_values))


def summary_line(report: ExperimentReport) -> str:
    parts = [f"{report.dataset} (l={report.n_samples})"]
    for name, res in report.strategies.items():
        parts.append(f"{name}: {res['mean_error']:.4f} +/- {res['std']:.4f} "
                     f"[{res['wall_seconds']:.2f}s]")
    return " | ".join(parts)
