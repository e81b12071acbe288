from dataclasses import dataclass

import numpy as np

from core.errors import DegenerateRangeError, ParameterError
from core.rng_provider import get_rng
from ingestion.dataset import Dataset


@dataclass(frozen=True, eq=False)
class SplitPlan:
    """Disjoint train / validation / test index sets covering 0..n-1."""

    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    seed: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.train_idx), len(self.val_idx), len(self.test_idx)

    def apply(self, data: Dataset) -> tuple[Dataset, Dataset, Dataset]:
        return (
            data.subset(self.train_idx, f"{data.name}/train"),
            data.subset(self.val_idx, f"{data.name}/val"),
            data.subset(self.test_idx, f"{data.name}/test"),
        )


def make_split(n: int, seed: int) -> SplitPlan:
    """
    Random 50/25/25 split: ceil(n/2) train, floor(n/4) validation,
    the remainder test. Deterministic per seed.
    """
    if n < 4:
        raise ParameterError(f"Need at least 4 samples to split, got {n}")
    order = get_rng(seed).permutation(n)
    n_train = -(-n // 2)
    n_val = n // 4
    return SplitPlan(
        train_idx=order[:n_train],
        val_idx=order[n_train : n_train + n_val],
        test_idx=order[n_train + n_val :],
        seed=seed,
    )


def normalize_targets(data: Dataset) -> tuple[Dataset, float, float]:
    """Affinely map regression targets onto [0, 1]; returns (data, min, max)."""
    if data.task != "regression":
        raise ParameterError("Only regression targets can be normalized")
    lo, hi = float(data.targets.min()), float(data.targets.max())
    if not hi > lo:
        raise DegenerateRangeError(f"Targets of '{data.name}' are constant ({lo})")
    return data.with_targets((data.targets - lo) / (hi - lo)), lo, hi


def denormalize_targets(values, lo: float, hi: float) -> np.ndarray:
    return np.asarray(values, dtype=float) * (hi - lo) + lo
