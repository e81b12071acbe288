"""
Individual losses and their subgradients.

Margin losses (logistic, hinge) are functions of t = y * f(x) and need
targets in {-1, +1}. Residual losses (squared, absolute) are functions of
r = y - f(x). Every loss here is convex and nonnegative in its scalar
argument.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from core.errors import InvalidTargetError, ParameterError, ShapeError

LOSS_KINDS = ("logistic", "hinge", "squared", "absolute")
MARGIN_KINDS = ("logistic", "hinge")

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class IndividualLoss:
    kind: str

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ParameterError(
                f"Unknown loss '{self.kind}', expected one of {', '.join(LOSS_KINDS)}"
            )

    @property
    def form(self) -> str:
        return "margin" if self.kind in MARGIN_KINDS else "residual"

    @property
    def task(self) -> str:
        """Learning task the loss is meant for."""
        return "classification" if self.form == "margin" else "regression"

    def value(self, arg):
        """Loss as a function of its scalar argument (margin or residual)."""
        arg = np.asarray(arg, dtype=float)
        if self.kind == "logistic":
            # log2(1 + e^{-t}), so value(0) == 1
            return np.logaddexp(0.0, -arg) / _LN2
        if self.kind == "hinge":
            return np.maximum(0.0, 1.0 - arg)
        if self.kind == "squared":
            return arg * arg
        return np.abs(arg)

    def derivative(self, arg):
        """A subgradient of value() with respect to its scalar argument.

        At the hinge kink (t == 1) and at r == 0 for the absolute loss the
        zero element of the subdifferential is returned.
        """
        arg = np.asarray(arg, dtype=float)
        if self.kind == "logistic":
            return -expit(-arg) / _LN2
        if self.kind == "hinge":
            return np.where(arg < 1.0, -1.0, 0.0)
        if self.kind == "squared":
            return 2.0 * arg
        return np.sign(arg)

    def argument(self, predictions, targets):
        """Map predictions f(x) and targets y onto the scalar loss argument."""
        predictions = np.asarray(predictions, dtype=float)
        targets = np.asarray(targets, dtype=float)
        if self.form == "margin":
            check_binary_targets(targets)
            return targets * predictions
        return targets - predictions


def check_binary_targets(targets) -> None:
    targets = np.asarray(targets, dtype=float)
    bad = ~np.isin(targets, (-1.0, 1.0))
    if np.any(bad):
        first = np.asarray(targets).ravel()[np.argmax(bad.ravel())]
        raise InvalidTargetError(
            f"Margin losses need targets in {{-1, +1}}, got {first!r}"
        )


def loss_value(loss: IndividualLoss, prediction: float, target: float) -> float:
    """Evaluate the individual loss for a single (prediction, target) pair."""
    return float(loss.value(loss.argument(prediction, target)))


def loss_subgradient(
    loss: IndividualLoss, features, weights, target: float
) -> np.ndarray:
    """
    Subgradient of w -> loss(w^T x, y) for a linear prediction.

    Args:
        loss: individual loss
        features: sample x, shape (d,)
        weights: parameters w, shape (d,)
        target: y

    Returns:
        Vector of shape (d,)
    """
    features = np.asarray(features, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if features.shape != weights.shape or features.ndim != 1:
        raise ShapeError(
            f"features {features.shape} and weights {weights.shape} must be equal 1-D shapes"
        )
    prediction = float(features @ weights)
    arg = loss.argument(prediction, target)
    # chain rule: d arg / d f is y for margins and -1 for residuals
    darg = float(target) if loss.form == "margin" else -1.0
    return float(loss.derivative(arg)) * darg * features


def sample_losses(loss: IndividualLoss, features, targets, weights) -> np.ndarray:
    """Vector of individual losses l_i(w) over a whole sample."""
    features = np.asarray(features, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if features.ndim != 2 or features.shape[1] != weights.shape[0]:
        raise ShapeError(
            f"features {features.shape} do not match weights {weights.shape}"
        )
    return loss.value(loss.argument(features @ weights, targets))
