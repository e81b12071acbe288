from dataclasses import dataclass

import numpy as np

from core.errors import DataError, InvalidTargetError, ParameterError, ShapeError

TASKS = ("classification", "regression")


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Immutable sample z = {(x_i, y_i)}: an n x d feature matrix plus n targets.

    Classification targets are +-1 labels, regression targets are reals.
    Arrays are copied and made read-only so datasets can be shared freely
    between workers.
    """

    features: np.ndarray
    targets: np.ndarray
    task: str = "classification"
    name: str = "dataset"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ParameterError(f"Unknown task '{self.task}'")

        features = np.array(self.features, dtype=float)
        targets = np.array(self.targets, dtype=float).ravel()
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        if features.ndim != 2:
            raise ShapeError(f"Features must be a 2-D matrix, got {features.shape}")
        n, d = features.shape
        if n < 1 or d < 1:
            raise DataError(f"Dataset '{self.name}' is empty ({n} x {d})")
        if targets.shape[0] != n:
            raise ShapeError(f"{n} feature rows but {targets.shape[0]} targets")
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(targets))):
            raise DataError(f"Dataset '{self.name}' contains NaN or Inf entries")
        if self.task == "classification" and not np.all(np.isin(targets, (-1.0, 1.0))):
            raise InvalidTargetError(
                f"Classification dataset '{self.name}' has labels outside {{-1, +1}}"
            )

        features.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, indices, name: str | None = None) -> "Dataset":
        indices = np.asarray(indices, dtype=int)
        return Dataset(
            features=self.features[indices],
            targets=self.targets[indices],
            task=self.task,
            name=name or self.name,
        )

    def with_targets(self, targets, name: str | None = None) -> "Dataset":
        return Dataset(self.features, targets, self.task, name or self.name)

    def class_counts(self) -> dict:
        if self.task != "classification":
            return {}
        return {
            "+1": int(np.sum(self.targets == 1.0)),
            "-1": int(np.sum(self.targets == -1.0)),
        }
