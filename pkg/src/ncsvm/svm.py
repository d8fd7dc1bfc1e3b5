"""Soft-margin SVM trained in the dual by sequential minimal optimization.

The working pair is the maximal violator ``i`` plus the partner ``j`` with
the largest second-order objective gain. Training stops once the maximal
KKT violation gap falls below ``tol``.

Two interchangeable backends solve the dual: the compiled ``_smo``
extension and the numpy ``_smo_py`` fallback. The compiled one is used
when importable unless ``NCSVM_BACKEND=python`` is set.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _smo_py
from .dataset import Dataset, DatasetError
from .kernel import KernelSpec, cross_kernel, kernel_matrix

log = logging.getLogger(__name__)

try:
    from . import _smo as _smo_ext
except ImportError:  # extension not built
    _smo_ext = None

BACKENDS = {"python": _smo_py.solve}
if _smo_ext is not None:
    BACKENDS["compiled"] = _smo_ext.solve

if os.environ.get("NCSVM_BACKEND", "").lower() == "python" or _smo_ext is None:
    BACKEND = "python"
else:
    BACKEND = "compiled"


class SvmError(ValueError):
    pass


@dataclass(frozen=True)
class SvmParams:
    C: float
    kernel: KernelSpec
    tol: float = 1e-3
    max_iter: int = 10_000_000

    def __post_init__(self):
        if not self.C > 0:
            raise SvmError("C must be positive")
        if not self.tol > 0:
            raise SvmError("tol must be positive")

    def to_dict(self) -> dict:
        return {"C": self.C, "kernel": self.kernel.to_dict(),
                "tol": self.tol, "max_iter": self.max_iter}

    @classmethod
    def from_dict(cls, d: dict) -> "SvmParams":
        return cls(float(d["C"]), KernelSpec.from_dict(d["kernel"]),
                   float(d["tol"]), int(d["max_iter"]))


@dataclass(frozen=True, eq=False)
class TrainedModel:
    alphas: np.ndarray
    bias: float
    X: np.ndarray
    y: np.ndarray
    params: SvmParams
    w_norm_sq: float
    converged: bool = True
    n_iter: int = 0
    _sv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sv = np.flatnonzero(self.alphas > 0)
        object.__setattr__(self, "_sv", sv)

    @property
    def support(self) -> np.ndarray:
        """Indices of training samples with nonzero coefficient."""
        return self._sv

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def decision_values(self, X) -> np.ndarray:
        """Vectorized ``f`` over the rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise SvmError(f"expected {self.n_features} features, got {X.shape[1]}")
        if self._sv.size == 0:
            return np.full(X.shape[0], self.bias)
        coef = self.alphas[self._sv] * self.y[self._sv]
        return cross_kernel(self.params.kernel, X, self.X[self._sv]) @ coef + self.bias

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_values(X) >= 0, 1, -1)


def get_backend(name: str | None = None):
    name = name or BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise SvmError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def _check_trainable(y: np.ndarray):
    if y.shape[0] < 2:
        raise SvmError("need at least two training samples")
    if not (np.any(y == 1) and np.any(y == -1)):
        raise SvmError("training data must contain both classes")


def train_gram(gram: np.ndarray, X: np.ndarray, y: np.ndarray, params: SvmParams,
               backend: str | None = None, trace: list | None = None) -> TrainedModel:
    """Train from a precomputed Gram matrix of ``X`` under ``params.kernel``."""
    y = np.asarray(y, dtype=np.int64)
    _check_trainable(y)
    solve = get_backend(backend)
    yf = y.astype(np.float64)
    alphas, bias, n_iter, converged = solve(gram, yf, params.C, params.tol,
                                            params.max_iter, trace)
    if not converged:
        log.warning("SMO hit max_iter=%d before KKT tolerance (C=%g, kernel=%s)",
                    params.max_iter, params.C, params.kernel)
    coef = alphas * yf
    w2 = max(float(coef @ gram @ coef), 0.0)
    return TrainedModel(alphas=alphas, bias=bias, X=np.asarray(X, dtype=np.float64), y=y,
                        params=params, w_norm_sq=w2, converged=bool(converged),
                        n_iter=int(n_iter))


def train_smo(train: Dataset, params: SvmParams, backend: str | None = None,
              trace: list | None = None) -> TrainedModel:
    """Solve the dual on ``train``.

    A run that stops at ``params.max_iter`` still returns a usable model,
    flagged with ``converged=False``.
    """
    if train.has_missing.any():
        raise DatasetError("training data contains missing values")
    _check_trainable(train.y)
    gram = kernel_matrix(params.kernel, train.X)
    return train_gram(gram, train.X, train.y, params, backend, trace)


def decision_function(model: TrainedModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise SvmError("decision_function takes a single feature vector")
    return float(model.decision_values(x[None, :])[0])


def weight_norm_sq(model: TrainedModel) -> float:
    return model.w_norm_sq


def dual_objective(model: TrainedModel) -> float:
    return float(np.sum(model.alphas) - 0.5 * model.w_norm_sq)


def kkt_violation(model: TrainedModel) -> float:
    """Largest violation of the per-sample KKT conditions in margin units."""
    margins = model.y * model.decision_values(model.X)
    C = model.params.C
    a = model.alphas
    viol = np.zeros_like(margins)
    at_zero = a <= 0
    at_c = a >= C
    free = ~at_zero & ~at_c
    viol[at_zero] = np.maximum(0.0, 1.0 - margins[at_zero])
    viol[at_c] = np.maximum(0.0, margins[at_c] - 1.0)
    viol[free] = np.abs(margins[free] - 1.0)
    return float(viol.max())


def model_to_dict(model: TrainedModel, indices: Sequence[int], dataset_hash: str) -> dict:
    """JSON-ready record; training samples are stored as row indices into
    the source dataset identified by ``dataset_hash``."""
    return {
        "params": model.params.to_dict(),
        "alphas": [float(a) for a in model.alphas],
        "bias": float(model.bias),
        "w_norm_sq": float(model.w_norm_sq),
        "converged": bool(model.converged),
        "n_iter": int(model.n_iter),
        "train_indices": [int(i) for i in indices],
        "dataset_hash": dataset_hash,
    }


def model_from_dict(d: dict, source: Dataset) -> TrainedModel:
    if d["dataset_hash"] != source.content_hash():
        raise SvmError("model was trained on a different dataset (content hash mismatch)")
    train = source.subset(d["train_indices"])
    alphas = np.asarray(d["alphas"], dtype=np.float64)
    if alphas.shape[0] != len(train):
        raise SvmError("coefficient count does not match training indices")
    return TrainedModel(alphas=alphas, bias=float(d["bias"]), X=train.X, y=train.y,
                        params=SvmParams.from_dict(d["params"]),
                        w_norm_sq=float(d["w_norm_sq"]), converged=bool(d["converged"]),
                        n_iter=int(d["n_iter"]))


def save_models(path, models: Sequence[TrainedModel], indices: Sequence[int],
                source: Dataset) -> None:
    """Write a trained grid sharing one training subset of ``source``."""
    h = source.content_hash()
    doc = {"models": [model_to_dict(m, indices, h) for m in models]}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_models(path, source: Dataset) -> list[TrainedModel]:
    with open(path) as fh:
        doc = json.load(fh)
    return [model_from_dict(d, source) for d in doc["models"]]
