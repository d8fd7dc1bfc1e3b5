"""Grid training and the two comparison strategies: grid-search b-fold
cross-validation and the maximum-distance-from-hyperplane predictor."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import Dataset, FoldPlan
from .kernel import KernelSpec, kernel_matrix
from .svm import SvmError, SvmParams, TrainedModel, train_gram

log = logging.getLogger(__name__)

TABLE2_GAMMAS = tuple(2.0 ** e for e in range(-15, 4, 2))
TABLE2_CS = tuple(2.0 ** e for e in range(-5, 16, 2))
LINF_MEASURES = ("geometric", "functional")


@dataclass(frozen=True)
class GridSpec:
    C_values: tuple = TABLE2_CS
    gamma_values: tuple = TABLE2_GAMMAS

    def __post_init__(self):
        object.__setattr__(self, "C_values", tuple(float(c) for c in self.C_values))
        object.__setattr__(self, "gamma_values", tuple(float(g) for g in self.gamma_values))
        if not self.C_values or not self.gamma_values:
            raise ValueError("grid needs at least one C and one gamma")
        if min(self.C_values) <= 0 or min(self.gamma_values) <= 0:
            raise ValueError("grid values must be positive")

    @property
    def K(self) -> int:
        return len(self.C_values) * len(self.gamma_values)

    def pairs(self) -> list[tuple[float, float]]:
        """(C, gamma) for model index k = iC * len(gammas) + igamma."""
        return [(c, g) for c in self.C_values for g in self.gamma_values]


@dataclass(frozen=True)
class CvSelection:
    best_C: float
    best_gamma: float
    cv_error_matrix: np.ndarray  # shape (len(C_values), len(gamma_values))
    model: TrainedModel = field(repr=False)
    n_trained: int = 0
    skipped: tuple = ()


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def train_grid(train: Dataset, grid: GridSpec, tol: float = 1e-3, jobs: int = 1,
               backend: str | None = None) -> list[TrainedModel]:
    """Train one model per grid pair, sharing one Gram matrix per gamma."""
    grams = {g: kernel_matrix(KernelSpec.gaussian(g), train.X) for g in grid.gamma_values}

    def fit(pair):
        C, g = pair
        return train_gram(grams[g], train.X, train.y,
                          SvmParams(C, KernelSpec.gaussian(g), tol), backend)

    return _map(fit, grid.pairs(), jobs)


def cross_validation_select(train: Dataset, grid: GridSpec, folds: FoldPlan,
                            tol: float = 1e-3, jobs: int = 1,
                            backend: str | None = None) -> CvSelection:
    """Pick (C, gamma) by mean held-fold 0/1 error, then refit on all of
    ``train``. Ties go to the smallest C, then the smallest gamma."""
    if folds.fold_assignments.shape[0] != len(train):
        raise ValueError("fold plan does not cover the training set")
    grams = {g: kernel_matrix(KernelSpec.gaussian(g), train.X) for g in grid.gamma_values}
    fold_idx = [(folds.complement(f), folds.fold(f)) for f in range(folds.b)]
    usable = [f for f, (fit_idx, _) in enumerate(fold_idx)
              if len(np.unique(train.y[fit_idx])) == 2]
    skipped = tuple(sorted(set(range(folds.b)) - set(usable)))
    for f in skipped:
        log.warning("fold %d complement is single-class; skipped for every grid pair", f)
    if not usable:
        raise SvmError("every cross-validation fold was skipped")

    def fold_error(task):
        C, g, f = task
        fit_idx, held_idx = fold_idx[f]
        gram = grams[g]
        model = train_gram(gram[np.ix_(fit_idx, fit_idx)], train.X[fit_idx], train.y[fit_idx],
                           SvmParams(C, KernelSpec.gaussian(g), tol), backend)
        coef = model.alphas * model.y
        fvals = gram[np.ix_(held_idx, fit_idx)] @ coef + model.bias
        pred = np.where(fvals >= 0, 1, -1)
        return float(np.mean(pred != train.y[held_idx]))

    tasks = [(C, g, f) for C, g in grid.pairs() for f in usable]
    errors = _map(fold_error, tasks, jobs)
    per_pair = np.asarray(errors).reshape(grid.K, len(usable)).mean(axis=1)
    matrix = per_pair.reshape(len(grid.C_values), len(grid.gamma_values))

    order = sorted(range(grid.K),
                   key=lambda k: (per_pair[k], grid.pairs()[k][0], grid.pairs()[k][1]))
    best_C, best_g = grid.pairs()[order[0]]
    final = train_gram(grams[best_g], train.X, train.y,
                       SvmParams(best_C, KernelSpec.gaussian(best_g), tol), backend)
    return CvSelection(best_C, best_g, matrix, final, n_trained=len(tasks) + 1, skipped=skipped)


def linf_choose(fvals: np.ndarray, w_norm_sq: np.ndarray,
                measure: str = "geometric") -> tuple[np.ndarray, np.ndarray]:
    """Vectorized choice over models for many test points.

    ``fvals`` has shape ``(K, T)``. The geometric measure is the distance
    ``|f_k(x)| / ||w_k||`` and is invariant to rescaling a model; the
    functional measure is ``|f_k(x)|``. Models with zero weight norm are
    never chosen. Returns ``(labels, chosen)``; the first index wins ties.
    """
    if measure not in LINF_MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    fvals = np.atleast_2d(np.asarray(fvals, dtype=np.float64))
    w = np.asarray(w_norm_sq, dtype=np.float64)
    valid = w > 0
    if not valid.any():
        raise SvmError("every model has zero weight norm")
    dist = np.full(fvals.shape, -np.inf)
    scale = np.sqrt(w[valid])[:, None] if measure == "geometric" else 1.0
    dist[valid] = np.abs(fvals[valid]) / scale
    chosen = np.argmax(dist, axis=0)
    picked = fvals[chosen, np.arange(fvals.shape[1])]
    return np.where(picked >= 0, 1, -1), chosen


def linf_predict(models: Sequence[TrainedModel], x,
                 measure: str = "geometric") -> tuple[int, int]:
    """Label from the model whose hyperplane lies farthest from ``x``."""
    x = np.asarray(x, dtype=np.float64)[None, :]
    fvals = np.array([[m.decision_values(x)[0]] for m in models])
    labels, chosen = linf_choose(fvals, np.array([m.w_norm_sq for m in models]), measure)
    return int(labels[0]), int(chosen[0])
