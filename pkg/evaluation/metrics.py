"""
Scores used for model selection and reporting. All values are fractions;
percentages are a presentation concern of the report layer.
"""

import numpy as np

from core.errors import ShapeError, UndefinedMetricError


def _pair(predictions, targets) -> tuple[np.ndarray, np.ndarray]:
    predictions = np.asarray(predictions, dtype=float).ravel()
    targets = np.asarray(targets, dtype=float).ravel()
    if predictions.shape != targets.shape:
        raise ShapeError(f"{predictions.size} predictions for {targets.size} targets")
    if predictions.size == 0:
        raise ShapeError("Cannot score an empty prediction vector")
    return predictions, targets


def to_labels(scores) -> np.ndarray:
    """sign(score) with sign(0) = +1."""
    return np.where(np.asarray(scores, dtype=float) >= 0.0, 1.0, -1.0)


def misclassification_rate(predictions, targets) -> float:
    """Fraction of disagreements; real-valued predictions are thresholded at 0."""
    predictions, targets = _pair(predictions, targets)
    return float(np.mean(to_labels(predictions) != targets))


def g_mean(predictions, targets) -> float:
    """sqrt(sensitivity * specificity) with +1 as the positive class."""
    predictions, targets = _pair(predictions, targets)
    labels = to_labels(predictions)
    positive = targets == 1.0
    negative = ~positive
    if not positive.any() or not negative.any():
        raise UndefinedMetricError("G-mean needs both classes among the targets")

    sensitivity = np.mean(labels[positive] == 1.0)
    specificity = np.mean(labels[negative] == -1.0)
    return float(np.sqrt(sensitivity * specificity))


def rmse(predictions, targets) -> float:
    predictions, targets = _pair(predictions, targets)
    return float(np.sqrt(np.mean((predictions - targets) ** 2)))


def mae(predictions, targets) -> float:
    predictions, targets = _pair(predictions, targets)
    return float(np.mean(np.abs(predictions - targets)))


PRIMARY_METRIC = {"classification": "misclassification", "regression": "rmse"}
SECONDARY_METRIC = {"classification": "g_mean", "regression": "mae"}

_SCORERS = {
    "misclassification": misclassification_rate,
    "g_mean": g_mean,
    "rmse": rmse,
    "mae": mae,
}


def score(metric: str, predictions, targets) -> float:
    return _SCORERS[metric](predictions, targets)


def secondary_score(task: str, predictions, targets) -> float:
    """Secondary metric, or NaN when it is undefined on this fold."""
    try:
        return score(SECONDARY_METRIC[task], predictions, targets)
    except UndefinedMetricError:
        return float("nan")
