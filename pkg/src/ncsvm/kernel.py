"""Gaussian and linear kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GAUSSIAN = "gaussian"
LINEAR = "linear"


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    kind: str = GAUSSIAN
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in (GAUSSIAN, LINEAR):
            raise KernelError(f"unknown kernel kind {self.kind!r}")
        if self.kind == GAUSSIAN and not self.gamma > 0:
            raise KernelError("gaussian kernel needs gamma > 0")

    @classmethod
    def gaussian(cls, gamma: float) -> "KernelSpec":
        return cls(GAUSSIAN, float(gamma))

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(LINEAR, 0.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(d["kind"], float(d["gamma"]))


def kernel_eval(spec: KernelSpec, a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise KernelError(f"vector length mismatch: {a.shape} vs {b.shape}")
    if spec.kind == LINEAR:
        return float(a @ b)
    d = a - b
    return float(np.exp(-spec.gamma * (d @ d)))


def cross_kernel(spec: KernelSpec, A, B) -> np.ndarray:
    """Kernel values between the rows of ``A`` and the rows of ``B``."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise KernelError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    G = A @ B.T
    if spec.kind == LINEAR:
        return G
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * G
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-spec.gamma * sq)


def kernel_matrix(spec: KernelSpec, X) -> np.ndarray:
    """Dense Gram matrix of the rows of ``X``; exactly symmetric."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] == 0:
        raise KernelError("empty input")
    K = cross_kernel(spec, X, X)
    upper = np.triu(K)
    K = upper + np.triu(K, 1).T
    if spec.kind == GAUSSIAN:
        np.fill_diagonal(K, 1.0)
    return np.ascontiguousarray(K)
