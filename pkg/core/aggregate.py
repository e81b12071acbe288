"""
Aggregate losses over the vector of n individual losses.

average  mean of all losses
maximum  largest loss
topk     k-th largest loss alone
atk      average of the k largest losses
abk      average of the k smallest losses
"""

from dataclasses import dataclass

import numpy as np

from core.errors import DomainError, ParameterError, ShapeError

AGGREGATE_KINDS = ("average", "maximum", "topk", "atk", "abk")
K_KINDS = ("topk", "atk", "abk")


@dataclass(frozen=True)
class AggregateSpec:
    kind: str
    k: int | None = None

    def __post_init__(self):
        if self.kind not in AGGREGATE_KINDS:
            raise ParameterError(
                f"Unknown aggregate '{self.kind}', expected one of {', '.join(AGGREGATE_KINDS)}"
            )
        if self.kind in K_KINDS and self.k is None:
            raise ParameterError(f"Aggregate '{self.kind}' needs k")

    def resolve_k(self, n: int) -> int:
        """The k this aggregate amounts to for n losses (average -> n, maximum -> 1)."""
        if self.kind == "average":
            return n
        if self.kind == "maximum":
            return 1
        _check_k(self.k, n)
        return int(self.k)


def _as_losses(losses) -> np.ndarray:
    losses = np.asarray(losses, dtype=float)
    if losses.ndim != 1 or losses.size == 0:
        raise ShapeError(f"Expected a nonempty 1-D loss vector, got shape {losses.shape}")
    if np.any(losses < 0):
        raise DomainError("Individual losses must be nonnegative")
    return losses


def _check_k(k, n: int) -> None:
    if k is None or int(k) != k or not 1 <= k <= n:
        raise ParameterError(f"k must be an integer in [1, {n}], got {k!r}")


def top_k_sum_sorted(losses, k: int) -> float:
    """Sum of the k largest entries, by a full descending sort."""
    x = _as_losses(losses)
    _check_k(k, x.size)
    return float(np.sort(x)[::-1][:k].sum())


def variational_objective(losses, k: int, lam: float) -> float:
    """k * lam + sum_i [x_i - lam]_+ ; minimised over lam >= 0 it is the top-k sum."""
    x = _as_losses(losses)
    return float(k * lam + np.maximum(x - lam, 0.0).sum())


def top_k_sum_variational(losses, k: int) -> tuple[float, float]:
    """
    Top-k sum through its variational form.

    Returns:
        (value, lambda_star) where lambda_star is the k-th largest entry,
        always a minimiser of variational_objective over lam >= 0.
    """
    x = _as_losses(losses)
    _check_k(k, x.size)
    lambda_star = float(np.sort(x)[::-1][k - 1])
    return variational_objective(x, k, lambda_star), lambda_star


def aggregate_value(losses, spec: AggregateSpec) -> float:
    x = _as_losses(losses)
    n = x.size
    if spec.kind == "average":
        return float(x.mean())
    if spec.kind == "maximum":
        return float(x.max())

    k = spec.resolve_k(n)
    if spec.kind == "topk":
        return float(np.sort(x)[::-1][k - 1])
    if spec.kind == "atk":
        return top_k_sum_sorted(x, k) / k

    # abk: drop the n - k largest, average the rest
    dropped = top_k_sum_sorted(x, n - k) if k < n else 0.0
    return (float(x.sum()) - dropped) / k


def all_aggregates(losses, k: int) -> dict:
    """Every aggregate of a loss vector at a given k, for diagnostics."""
    return {
        kind: aggregate_value(losses, AggregateSpec(kind, k))
        for kind in AGGREGATE_KINDS
    }


def hinge_compose(a: float, b: float, ell: float) -> float:
    """[a - b - ell]_+, which equals [[a - ell]_+ - b]_+ whenever a, b >= 0."""
    if a < 0 or b < 0:
        raise DomainError(f"hinge_compose needs a >= 0 and b >= 0, got a={a}, b={b}")
    composed = max(0.0, a - b - ell)
    nested = max(0.0, max(0.0, a - ell) - b)
    if not np.isclose(composed, nested, rtol=1e-12, atol=1e-12):
        raise DomainError(f"hinge composition mismatch: {composed} != {nested}")
    return composed
