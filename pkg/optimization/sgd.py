"""
MAT_k training by joint stochastic subgradient descent over (w, lambda).

Objective for a linear model f(x) = w^T x:

    (1/n) sum_i [l_i(w) - lambda]_+ + (k/n) lambda + ||w||^2 / (2C),   lambda >= 0

One step on a sample i with step size eta:

    a       = 1 if l_i(w) > lambda else 0
    w'      = w - eta * (a * dl_i(w) + w / C)
    lambda' = [lambda - eta * (k/n - a)]_+
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from core.errors import ConvergenceError, DomainError, ParameterError, ShapeError
from core.losses import IndividualLoss, check_binary_targets, sample_losses
from core.rng_provider import STREAM_TRAIN, get_rng
from ingestion.dataset import Dataset

logger = logging.getLogger(__name__)

DEFAULT_ETA0 = 0.1
DEFAULT_ITERATIONS = 5000
DEFAULT_RECORD_EVERY = 100


@dataclass(frozen=True, eq=False)
class ModelState:
    w: np.ndarray
    lam: float = 0.0
    C: float = 1.0

    def __post_init__(self):
        w = np.array(self.w, dtype=float).ravel()
        if not np.all(np.isfinite(w)):
            raise DomainError("Model weights must be finite")
        if self.lam < 0:
            raise DomainError(f"lambda must be nonnegative, got {self.lam}")
        if not self.C > 0:
            raise ParameterError(f"C must be positive, got {self.C}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "C", float(self.C))

    @classmethod
    def zeros(cls, d: int, C: float) -> "ModelState":
        return cls(w=np.zeros(d), lam=0.0, C=C)

    def predict(self, features) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if features.shape[1] != self.w.shape[0]:
            raise ShapeError(f"features {features.shape} do not match w {self.w.shape}")
        return features @ self.w

    def to_dict(self) -> dict:
        return {"w": self.w.tolist(), "lambda": self.lam, "C": self.C}

    @classmethod
    def from_dict(cls, record: dict) -> "ModelState":
        return cls(w=np.asarray(record["w"], dtype=float), lam=record["lambda"], C=record["C"])


@dataclass(frozen=True)
class TrainConfig:
    k: int
    iterations: int = DEFAULT_ITERATIONS
    eta0: float = DEFAULT_ETA0
    seed: int = 0
    record_every: int = DEFAULT_RECORD_EVERY

    def validate(self, n: int) -> None:
        if int(self.k) != self.k or not 1 <= self.k <= n:
            raise ParameterError(f"k must be an integer in [1, {n}], got {self.k}")
        if self.iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")
        if not self.eta0 > 0:
            raise ParameterError(f"eta0 must be positive, got {self.eta0}")
        if self.record_every < 1:
            raise ParameterError(f"record_every must be >= 1, got {self.record_every}")

    def to_dict(self) -> dict:
        return {
            "k": int(self.k),
            "iterations": int(self.iterations),
            "eta0": float(self.eta0),
            "seed": int(self.seed),
            "record_every": int(self.record_every),
        }


def objective_value(state: ModelState, data: Dataset, loss: IndividualLoss, k: int) -> float:
    """Full-batch MAT_k objective at (w, lambda)."""
    n = data.n
    if int(k) != k or not 1 <= k <= n:
        raise ParameterError(f"k must be an integer in [1, {n}], got {k}")
    losses = sample_losses(loss, data.features, data.targets, state.w)
    shifted = np.maximum(losses - state.lam, 0.0).mean()
    return float(shifted + (k / n) * state.lam + state.w @ state.w / (2.0 * state.C))


def _step(w, lam, x, y, loss: IndividualLoss, k_over_n: float, eta: float, C: float):
    margin = loss.form == "margin"
    prediction = float(x @ w)
    arg = y * prediction if margin else y - prediction
    active = float(loss.value(arg)) > lam

    direction = w / C
    if active:
        darg = y if margin else -1.0
        direction = direction + float(loss.derivative(arg)) * darg * x
    w_new = w - eta * direction
    lam_new = max(0.0, lam - eta * (k_over_n - (1.0 if active else 0.0)))
    return w_new, lam_new


def sgd_step(
    state: ModelState,
    sample: tuple,
    loss: IndividualLoss,
    k: int,
    n: int,
    eta_t: float,
) -> ModelState:
    """One projected subgradient step on a single sample (x, y)."""
    x, y = sample
    x = np.asarray(x, dtype=float)
    if x.shape != state.w.shape:
        raise ShapeError(f"sample {x.shape} does not match w {state.w.shape}")
    if loss.form == "margin":
        check_binary_targets(y)
    w, lam = _step(state.w, state.lam, x, float(y), loss, k / n, eta_t, state.C)
    return ModelState(w=w, lam=lam, C=state.C)


def train(
    data: Dataset, loss: IndividualLoss, config: TrainConfig, C: float
) -> tuple[ModelState, list[tuple[int, float]]]:
    """
    Run config.iterations steps with eta_t = eta0 / sqrt(t), drawing samples
    uniformly with replacement. Starts from w = 0, lambda = 0.

    Returns:
        (final state, trace of (iteration, full-batch objective)) where the
        trace holds iteration 0, every record_every-th iteration and the last.
    """
    n = data.n
    if n < 1:
        raise ParameterError("Cannot train on an empty dataset")
    config.validate(n)
    if not C > 0:
        raise ParameterError(f"C must be positive, got {C}")
    if loss.form == "margin":
        check_binary_targets(data.targets)

    X, y = data.features, data.targets
    draws = get_rng(config.seed, STREAM_TRAIN).integers(0, n, size=config.iterations)
    k_over_n = config.k / n

    state = ModelState.zeros(data.d, C)
    trace = [(0, objective_value(state, data, loss, config.k))]
    w, lam = state.w.copy(), 0.0

    for t in range(1, config.iterations + 1):
        i = draws[t - 1]
        w, lam = _step(w, lam, X[i], y[i], loss, k_over_n, config.eta0 / math.sqrt(t), C)
        if not np.all(np.isfinite(w)):
            raise ConvergenceError(f"SGD diverged at iteration {t}; lower eta0")
        if t % config.record_every == 0 or t == config.iterations:
            trace.append((t, objective_value(ModelState(w, lam, C), data, loss, config.k)))

    final = ModelState(w=w, lam=lam, C=C)
    logger.debug(
        "Trained %s/k=%d/C=%g on %s: objective %.6f, lambda %.4f",
        loss.kind, config.k, C, data.name, trace[-1][1], lam,
    )
    return final, trace


def calibration_min_k(estimated_optimal_risk: float, n: int) -> int:
    """
    Smallest k with k > n * risk, clamped to [1, n].

    Advisory: choosing k above n times the optimal risk of the individual
    loss keeps the AT_k objective classification calibrated.
    """
    if not 0.0 <= estimated_optimal_risk <= 1.0:
        raise DomainError(f"risk must lie in [0, 1], got {estimated_optimal_risk}")
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    # rounding guards decimal inputs such as 0.2 * 100
    k = math.floor(round(n * estimated_optimal_risk, 9)) + 1
    return int(min(max(k, 1), n))
