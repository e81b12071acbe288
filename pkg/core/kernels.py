from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from core.errors import ParameterError, ShapeError

KERNEL_KINDS = ("linear", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    """K(x, x') = x^T x' (linear) or exp(-gamma * ||x - x'||^2) (rbf)."""

    kind: str = "linear"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ParameterError(
                f"Unknown kernel '{self.kind}', expected one of {', '.join(KERNEL_KINDS)}"
            )
        if self.kind == "rbf" and not self.gamma > 0:
            raise ParameterError(f"rbf gamma must be positive, got {self.gamma}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": float(self.gamma)}

    @classmethod
    def from_dict(cls, record: dict) -> "KernelSpec":
        return cls(kind=record["kind"], gamma=float(record.get("gamma", 1.0)))


def kernel_matrix(spec: KernelSpec, X, Y=None) -> np.ndarray:
    """Dense kernel matrix K[i, j] = K(X[i], Y[j]); Y defaults to X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise ShapeError(f"Kernel inputs disagree in dimension: {X.shape} vs {Y.shape}")

    if spec.kind == "linear":
        return X @ Y.T
    return np.exp(-spec.gamma * cdist(X, Y, "sqeuclidean"))
