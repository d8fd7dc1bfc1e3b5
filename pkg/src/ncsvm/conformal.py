"""Margin-based nonconformity p-values and model selection by the critical
epsilon over a grid of trained models.

For model ``k`` the score of a labelled point is its functional margin
``y * f_k(x)``. The p-value of a candidate label is the fraction of
validation scores at or below the candidate's score. The prediction for a
test point is the opposite of the (model, label) pair with the smallest
p-value over the whole grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Dataset

LABELS = (-1, 1)
VC_CONSTANT = 5.66


class ConformalError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Validation margins, one ascending row per model (shape ``K x n``)."""

    scores: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
            raise ConformalError("score table needs K >= 1 rows of n >= 1 scores")
        object.__setattr__(self, "scores", np.sort(s, axis=1))

    @property
    def K(self) -> int:
        return self.scores.shape[0]

    @property
    def n(self) -> int:
        return self.scores.shape[1]

    def counts(self, k: int, score) -> np.ndarray | int:
        """Number of validation scores of model ``k`` that are <= ``score``."""
        c = np.searchsorted(self.scores[k], score, side="right")
        return int(c) if np.ndim(c) == 0 else c


@dataclass(frozen=True)
class PredictionRegion:
    labels: frozenset
    epsilon: float


@dataclass(frozen=True)
class ConformalDecision:
    predicted_label: int
    epsilon_crit: float
    crit_count: int
    k_crit: int
    y_crit: int
    bound: float
    tie_count: int


def build_score_table(models: Sequence, validation: Dataset) -> ScoreTable:
    if len(validation) == 0:
        raise ConformalError("empty validation set")
    rows = [validation.y * m.decision_values(validation.X) for m in models]
    return ScoreTable(np.vstack(rows))


def p_value(table: ScoreTable, k: int, score: float) -> float:
    return table.counts(k, score) / table.n


def prediction_region(table: ScoreTable, models: Sequence, x, epsilon: float,
                      k: int) -> PredictionRegion:
    """Labels whose p-value under model ``k`` is at least ``epsilon``."""
    if not 0.0 <= epsilon <= 1.0:
        raise ConformalError("epsilon must lie in [0, 1]")
    f = models[k].decision_values(np.asarray(x, dtype=np.float64)[None, :])[0]
    labels = frozenset(y for y in LABELS if p_value(table, k, y * f) >= epsilon)
    return PredictionRegion(labels, epsilon)


def vc_deviation(d: int, m: int, delta: float) -> float:
    """Uniform deviation between empirical and true probabilities over a set
    system of VC dimension ``d`` from an ``m``-sample, at confidence ``1-delta``."""
    if d < 1 or m < 1 or not 0.0 < delta < 1.0:
        raise ConformalError("need d >= 1, m >= 1 and 0 < delta < 1")
    return VC_CONSTANT * math.sqrt((d * math.log(math.e * m / d) + math.log(8.0 / delta)) / m)


def generalisation_bound(epsilon_crit: float, n: int, K: int, delta: float) -> float:
    """Per-test-point misclassification bound for a grid of ``K`` models
    scored on ``n`` validation samples. May exceed 1."""
    if n < 1 or K < 1 or not 0.0 < delta < 1.0:
        raise ConformalError("need n >= 1, K >= 1 and 0 < delta < 1")
    return epsilon_crit + VC_CONSTANT * math.sqrt(
        (math.log(math.e * n) + math.log(8.0 * K / delta)) / n)


def critical_counts(table: ScoreTable, fvals: np.ndarray) -> np.ndarray:
    """Counts for every (model, label) pair and every test point.

    ``fvals`` has shape ``(K, T)``; the result has shape ``(K, 2, T)`` with
    label axis ordered as :data:`LABELS`.
    """
    fvals = np.asarray(fvals, dtype=np.float64)
    if fvals.ndim == 1:
        fvals = fvals[:, None]
    if fvals.shape[0] != table.K:
        raise ConformalError(f"got decision values for {fvals.shape[0]} models, table has {table.K}")
    out = np.empty((table.K, 2, fvals.shape[1]), dtype=np.int64)
    for k in range(table.K):
        row = table.scores[k]
        out[k, 0] = np.searchsorted(row, -fvals[k], side="right")
        out[k, 1] = np.searchsorted(row, fvals[k], side="right")
    return out


def decide(table: ScoreTable, fvals, rng: np.random.Generator, delta: float = 0.05,
           counts: np.ndarray | None = None) -> ConformalDecision:
    """Decision for one test point from its decision values under each model.

    Ties for the minimum are broken uniformly at random among all
    minimizing (model, label) pairs.
    """
    if counts is None:
        counts = critical_counts(table, np.asarray(fvals)[:, None])[:, :, 0]
    flat = counts.reshape(-1)  # index = 2*k + label slot
    c_min = int(flat.min())
    ties = np.flatnonzero(flat == c_min)
    pick = int(ties[rng.integers(ties.size)]) if ties.size > 1 else int(ties[0])
    k_crit, slot = divmod(pick, 2)
    y_crit = LABELS[slot]
    eps = c_min / table.n
    return ConformalDecision(
        predicted_label=-y_crit,
        epsilon_crit=eps,
        crit_count=c_min,
        k_crit=k_crit,
        y_crit=y_crit,
        bound=generalisation_bound(eps, table.n, table.K, delta),
        tie_count=int(ties.size),
    )


def epsilon_crit(table: ScoreTable, models: Sequence, x, seed: int = 0,
                 delta: float = 0.05) -> ConformalDecision:
    x = np.asarray(x, dtype=np.float64)
    fvals = np.array([m.decision_values(x[None, :])[0] for m in models])
    return decide(table, fvals, np.random.default_rng(seed), delta)


def decide_batch(table: ScoreTable, fvals: np.ndarray, seeds: Sequence,
                 delta: float = 0.05) -> list[ConformalDecision]:
    """:func:`decide` for every column of ``fvals`` (shape ``(K, T)``);
    ``seeds[t]`` seeds the tie-break of test point ``t``."""
    counts = critical_counts(table, fvals)
    return [decide(table, None, np.random.default_rng(seeds[t]), delta, counts[:, :, t])
            for t in range(counts.shape[2])]
