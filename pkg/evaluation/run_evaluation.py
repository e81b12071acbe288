"""
Experiment protocol for MAT_k models.

Each repeat r draws a fresh 50/25/25 split (make_split(n, seed + r)); every
(k, C) cell is trained on the training part and scored on validation and test.
The cell with the lowest validation score wins (ties: smaller k, then smaller C).
Cells are independent, so they can run in a process pool; results are reduced
in cell order, making serial and parallel runs identical.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from multiprocessing import Pool

import numpy as np
import pandas as pd

from core.errors import ConvergenceError, ParameterError
from core.losses import IndividualLoss
from core.rng_provider import STREAM_CELL, derive_seed
from evaluation.metrics import PRIMARY_METRIC, SECONDARY_METRIC, score, secondary_score
from ingestion.dataset import Dataset
from ingestion.splits import make_split, normalize_targets
from optimization.sgd import TrainConfig, train

logger = logging.getLogger(__name__)

DEFAULT_K_POINTS = 15
DEFAULT_C_GRID = tuple(float(10.0**e) for e in range(-5, 6))
DEFAULT_SWEEP_C = 100.0
DEFAULT_REPEATS = 10

CELL_COLUMNS = ["repeat", "k", "C", "val", "test", "val_secondary", "test_secondary"]


def k_grid(n: int, points: int = DEFAULT_K_POINTS) -> list[int]:
    """
    Integer log10 grid over [1, n]: round(10^(j log10(n) / (points - 1))),
    j = 0..points-1, deduplicated. Always contains 1 and n.
    """
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    if points < 2:
        raise ParameterError(f"a k-grid needs at least 2 points, got {points}")
    exponents = np.arange(points) * math.log10(n) / (points - 1)
    grid = {int(round(10.0**e)) for e in exponents}
    grid.update({1, n})
    return sorted(g for g in grid if 1 <= g <= n)


def train_size(n: int) -> int:
    return -(-n // 2)


@dataclass
class GridSearchResult:
    best_k: int
    best_C: float
    val_score: float
    test_scores: list[float]
    mean: float
    std: float
    metric: str
    secondary_metric: str = ""
    secondary_scores: list[float] = field(default_factory=list)
    selections: list[tuple[int, float]] = field(default_factory=list)
    cells: pd.DataFrame = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "best_k": int(self.best_k),
            "best_C": float(self.best_C),
            "val_score": float(self.val_score),
            "test_scores": [float(s) for s in self.test_scores],
            "mean": float(self.mean),
            "std": float(self.std),
            "metric": self.metric,
            "secondary_metric": self.secondary_metric,
            "secondary_scores": [float(s) for s in self.secondary_scores],
            "selections": [{"k": int(k), "C": float(c)} for k, c in self.selections],
            "cells": [] if self.cells is None else self.cells.to_dict(orient="records"),
        }


# Per-process state for pool workers; set once by _init_worker.
_WORKER = {}


def _init_worker(data: Dataset, loss: IndividualLoss, train_cfg: TrainConfig, seed: int):
    _WORKER.update(data=data, loss=loss, train_cfg=train_cfg, seed=seed, splits={})


def _split_parts(repeat: int):
    splits = _WORKER["splits"]
    if repeat not in splits:
        plan = make_split(_WORKER["data"].n, _WORKER["seed"] + repeat)
        splits[repeat] = plan.apply(_WORKER["data"])
    return splits[repeat]


def _run_cell(cell: tuple[int, int, float]) -> dict:
    """Train one (repeat, k, C) cell; the training stream is keyed by (repeat, k)."""
    repeat, k, C = cell
    loss = _WORKER["loss"]
    train_set, val_set, test_set = _split_parts(repeat)

    config = replace(
        _WORKER["train_cfg"], k=k, seed=derive_seed(_WORKER["seed"], STREAM_CELL, repeat, k)
    )
    try:
        state, _ = train(train_set, loss, config, C)
    except ConvergenceError as e:
        # a diverged cell can never win the selection
        logger.warning("repeat %d, k=%d, C=%g: %s", repeat, k, C, e)
        failed = {"val": math.inf, "test": math.inf, "val_secondary": math.nan, "test_secondary": math.nan}
        return {"repeat": repeat, "k": k, "C": C, **failed}

    metric = PRIMARY_METRIC[loss.task]
    val_pred = state.predict(val_set.features)
    test_pred = state.predict(test_set.features)
    return {
        "repeat": repeat,
        "k": k,
        "C": C,
        "val": score(metric, val_pred, val_set.targets),
        "test": score(metric, test_pred, test_set.targets),
        "val_secondary": secondary_score(loss.task, val_pred, val_set.targets),
        "test_secondary": secondary_score(loss.task, test_pred, test_set.targets),
    }


def _evaluate_cells(
    data: Dataset,
    loss: IndividualLoss,
    train_cfg: TrainConfig,
    seed: int,
    cells: list[tuple[int, int, float]],
    jobs: int,
) -> pd.DataFrame:
    initargs = (data, loss, train_cfg, seed)
    if jobs > 1 and len(cells) > 1:
        with Pool(processes=jobs, initializer=_init_worker, initargs=initargs) as pool:
            rows = pool.map(_run_cell, cells, chunksize=max(1, len(cells) // (4 * jobs)))
    else:
        _init_worker(*initargs)
        rows = [_run_cell(cell) for cell in cells]
    _WORKER.clear()
    return pd.DataFrame(rows, columns=CELL_COLUMNS)


def _prepare(data: Dataset, loss: IndividualLoss, repeats: int, k_values) -> Dataset:
    if data.task != loss.task:
        raise ParameterError(f"{loss.kind} loss is for {loss.task}, data '{data.name}' is {data.task}")
    if repeats < 1:
        raise ParameterError(f"repeats must be >= 1, got {repeats}")
    n_train = train_size(data.n)
    if not len(k_values):
        raise ParameterError("k grid is empty")
    bad = [k for k in k_values if int(k) != k or not 1 <= k <= n_train]
    if bad:
        raise ParameterError(f"k values {bad} lie outside [1, {n_train}] (training split size)")
    if data.task == "regression":
        data, _, _ = normalize_targets(data)
    return data


def _mode(values) -> float:
    counts = pd.Series(list(values)).value_counts()
    return min(counts[counts == counts.max()].index)


def _select(cells: pd.DataFrame) -> pd.DataFrame:
    """The winning cell of every repeat: lowest validation score, then smaller k, then smaller C."""
    ordered = cells.sort_values(["repeat", "val", "k", "C"], kind="mergesort")
    return ordered.groupby("repeat", sort=True).head(1).reset_index(drop=True)


def grid_search(
    data: Dataset,
    loss: IndividualLoss,
    k_grid,
    C_grid,
    repeats: int,
    seed: int,
    train_cfg: TrainConfig,
    jobs: int = 1,
    extend_c_steps: int = 0,
) -> GridSearchResult:
    """
    Select (k, C) on validation splits and report test scores per repeat.

    Regression targets are normalised to [0, 1] on the full data first. When
    extend_c_steps > 0 and the selected C sits on the edge of the C grid, the
    grid is extended by one decade on that side, up to extend_c_steps times.

    Returns:
        GridSearchResult; best_k / best_C are the most frequent per-repeat choices.
    """
    data = _prepare(data, loss, repeats, k_grid)
    k_values = sorted({int(k) for k in k_grid})
    C_values = sorted({float(c) for c in C_grid})
    if not C_values or any(c <= 0 for c in C_values):
        raise ParameterError(f"C grid must be nonempty and positive, got {list(C_grid)}")

    cells = [(r, k, c) for r in range(repeats) for k in k_values for c in C_values]
    table = _evaluate_cells(data, loss, train_cfg, seed, cells, jobs)

    for _ in range(extend_c_steps):
        best_C = _mode(_select(table)["C"])
        if best_C == C_values[0]:
            new_C = C_values[0] / 10.0
        elif best_C == C_values[-1]:
            new_C = C_values[-1] * 10.0
        else:
            break
        logger.info("Selected C=%g is on the grid edge, adding C=%g", best_C, new_C)
        C_values = sorted(C_values + [new_C])
        extra = [(r, k, new_C) for r in range(repeats) for k in k_values]
        table = pd.concat(
            [table, _evaluate_cells(data, loss, train_cfg, seed, extra, jobs)], ignore_index=True
        )

    table = table.sort_values(["repeat", "k", "C"], kind="mergesort").reset_index(drop=True)
    chosen = _select(table)
    test_scores = chosen["test"].to_numpy(dtype=float)
    result = GridSearchResult(
        best_k=int(_mode(chosen["k"])),
        best_C=float(_mode(chosen["C"])),
        val_score=float(chosen["val"].mean()),
        test_scores=test_scores.tolist(),
        mean=float(test_scores.mean()),
        std=float(test_scores.std()),
        metric=PRIMARY_METRIC[loss.task],
        secondary_metric=SECONDARY_METRIC[loss.task],
        secondary_scores=chosen["test_secondary"].astype(float).tolist(),
        selections=list(zip(chosen["k"].astype(int), chosen["C"].astype(float))),
        cells=table,
    )
    logger.info(
        "Grid search on %s (%s): k*=%d C*=%g, test %s %.4f +- %.4f",
        data.name, loss.kind, result.best_k, result.best_C, result.metric, result.mean, result.std,
    )
    return result


def sweep_k(
    data: Dataset,
    loss: IndividualLoss,
    k_values,
    C: float,
    repeats: int,
    seed: int,
    train_cfg: TrainConfig,
    jobs: int = 1,
) -> list[tuple[int, float, float]]:
    """
    Mean and std of the test score per k at a fixed C.

    Every k sees the same splits (repeat r always uses make_split(n, seed + r)).
    """
    data = _prepare(data, loss, repeats, k_values)
    if not C > 0:
        raise ParameterError(f"C must be positive, got {C}")
    ks = [int(k) for k in k_values]
    cells = [(r, k, float(C)) for k in dict.fromkeys(ks) for r in range(repeats)]
    table = _evaluate_cells(data, loss, train_cfg, seed, cells, jobs)

    summary = table.groupby("k", sort=False)["test"].agg(["mean", lambda s: s.std(ddof=0)])
    summary.columns = ["mean", "std"]
    return [(k, float(summary.at[k, "mean"]), float(summary.at[k, "std"])) for k in ks]


def compare_objectives(
    data: Dataset,
    loss: IndividualLoss,
    C_grid,
    repeats: int,
    seed: int,
    train_cfg: TrainConfig,
    k_points: int = DEFAULT_K_POINTS,
    jobs: int = 1,
) -> dict[str, GridSearchResult]:
    """
    Maximum (k = 1), Average (k = n_train) and AT_k* (full k grid) objectives,
    each grid-searched over C on the same splits.
    """
    n_train = train_size(data.n)
    grids = {
        "maximum": [1],
        "average": [n_train],
        "atk": k_grid(n_train, k_points),
    }
    return {
        name: grid_search(data, loss, ks, C_grid, repeats, seed, train_cfg, jobs=jobs)
        for name, ks in grids.items()
    }
