"""
Synthetic datasets: six 2-D Gaussian classification cases and sinc regression.

The Gaussian cases are fully described by gaussian_cases.json; the table is
versioned so a generated file can always be traced back to its parameters.
"""

import json
import logging
from functools import lru_cache
from pathlib import Path

import numpy as np

from core.errors import ParameterError
from core.rng_provider import STREAM_GENERATE, get_rng
from ingestion.dataset import Dataset

logger = logging.getLogger(__name__)

CASE_TABLE_PATH = Path(__file__).with_name("gaussian_cases.json")
CASE_IDS = (1, 2, 3, 4, 5, 6)

SINC_CENTERS = np.linspace(-10.0, 10.0, 10)
SINC_NOISE_STD = 0.2


@lru_cache(maxsize=1)
def load_case_table() -> dict:
    with open(CASE_TABLE_PATH, "r") as f:
        return json.load(f)


def case_config(case_id: int) -> dict:
    if case_id not in CASE_IDS:
        raise ParameterError(f"case_id must be one of {CASE_IDS}, got {case_id!r}")
    return load_case_table()["cases"][str(case_id)]


def _component_counts(fractions, n_total: int) -> list[int]:
    counts = [int(round(f * n_total)) for f in fractions[:-1]]
    counts.append(n_total - sum(counts))
    return counts


def generate_gaussian_case(case_id: int, n_total: int = 200, seed: int = 0) -> Dataset:
    """
    Draw one of the six 2-D cases.

    Odd cases are pure Gaussian mixtures with n_total points. Even cases are
    the preceding odd case (same seed, same n_total) plus one outlier, so
    they hold n_total + 1 points and differ from their base by that point only.
    """
    config = case_config(case_id)
    if n_total < 10:
        raise ParameterError(f"n_total must be at least 10, got {n_total}")

    if "base" in config:
        base = generate_gaussian_case(int(config["base"]), n_total, seed)
        outlier = config["outlier"]
        return Dataset(
            features=np.vstack([base.features, np.asarray(outlier["point"], dtype=float)]),
            targets=np.append(base.targets, float(outlier["label"])),
            task="classification",
            name=f"gaussian_case{case_id}",
        )

    rng = get_rng(seed, STREAM_GENERATE)
    components = config["components"]
    counts = _component_counts([c["fraction"] for c in components], n_total)

    features, targets = [], []
    for component, count in zip(components, counts):
        center = np.asarray(component["center"], dtype=float)
        features.append(center + component["sigma"] * rng.standard_normal((count, 2)))
        targets.append(np.full(count, float(component["label"])))

    logger.debug("Generated case %d with component sizes %s", case_id, counts)
    return Dataset(
        features=np.vstack(features),
        targets=np.concatenate(targets),
        task="classification",
        name=f"gaussian_case{case_id}",
    )


def sinc(x) -> np.ndarray:
    """sin(x)/x with the removable singularity filled in (sinc(0) = 1)."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def rbf_features(x, centers=SINC_CENTERS) -> np.ndarray:
    """Map scalars x to [exp(-(x - c_1)^2), ..., exp(-(x - c_m)^2)]."""
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    return np.exp(-((x - np.asarray(centers, dtype=float)) ** 2))


def generate_sinc(n: int = 1000, seed: int = 0, noise_std: float = SINC_NOISE_STD) -> Dataset:
    """x ~ U[-10, 10], y = sin(x)/x + N(0, noise_std^2), features = 10 RBF responses."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    rng = get_rng(seed, STREAM_GENERATE)
    x = rng.uniform(-10.0, 10.0, size=n)
    noise = rng.normal(0.0, noise_std, size=n) if noise_std > 0 else np.zeros(n)
    return Dataset(
        features=rbf_features(x),
        targets=sinc(x) + noise,
        task="regression",
        name="sinc",
    )
