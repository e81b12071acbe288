"""
Dataset file readers and writers.

Dense CSV:   one sample per row, comma separated, target in the last column.
Sparse:      "label idx:val idx:val ..." with 1-based, increasing indices;
             absent indices are zero. Lines starting with '#' are comments.
"""

import logging
import re
from pathlib import Path

import numpy as np
import pandas as pd
from sklearn.datasets import load_svmlight_file

from core.errors import DataError, ParseError
from ingestion.dataset import Dataset

logger = logging.getLogger(__name__)

_PANDAS_LINE = re.compile(r"line (\d+)")


def _to_float(text) -> float:
    """Exact decimal-to-double conversion; unparsable or missing cells become NaN."""
    if not isinstance(text, str):
        return np.nan
    try:
        return float(text)
    except ValueError:
        return np.nan


def _infer_task(targets: np.ndarray, task: str | None) -> str:
    if task is not None:
        return task
    if np.all(np.isin(targets, (-1.0, 1.0))):
        return "classification"
    return "regression"


def _check_file(path: Path) -> None:
    if not path.exists():
        raise DataError(f"Dataset file not found: {path}")
    if not path.read_text().strip():
        raise DataError(f"Dataset file is empty: {path}")


def load_dense_csv(path, task: str | None = None, name: str | None = None) -> Dataset:
    path = Path(path)
    _check_file(path)

    try:
        raw = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError as e:
        raise DataError(f"Dataset file is empty: {path}") from e
    except pd.errors.ParserError as e:
        match = _PANDAS_LINE.search(str(e))
        raise ParseError(
            f"inconsistent number of columns in {path.name}",
            int(match.group(1)) if match else None,
        ) from e

    if raw.shape[1] < 2:
        raise ParseError(f"{path.name} needs at least one feature column and a target", 1)

    values = raw.apply(lambda col: col.map(_to_float))
    bad = values.isna().to_numpy()
    if bad.any():
        row, col = np.argwhere(bad)[0]
        line = int(row) + 1
        if raw.isna().iat[row, col]:
            raise ParseError(
                f"expected {raw.shape[1]} fields, row is short (inconsistent dimensionality)",
                line,
            )
        raise ParseError(f"cannot parse {raw.iat[row, col]!r} as a number", line)

    matrix = values.to_numpy(dtype=float)
    targets = matrix[:, -1]
    dataset = Dataset(
        features=matrix[:, :-1],
        targets=targets,
        task=_infer_task(targets, task),
        name=name or path.stem,
    )
    logger.info(
        "Loaded %s: %d samples x %d features (%s)",
        path.name, dataset.n, dataset.d, dataset.task,
    )
    return dataset


def _scan_sparse(path: Path) -> int:
    """Validate every line; returns the largest feature index seen."""
    max_index = 0
    samples = 0
    for line_number, line in enumerate(path.read_text().splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        tokens = body.split()
        try:
            float(tokens[0])
        except ValueError:
            raise ParseError(f"cannot parse label {tokens[0]!r}", line_number) from None

        previous = 0
        for token in tokens[1:]:
            index, sep, value = token.partition(":")
            try:
                if not sep:
                    raise ValueError
                index = int(index)
                float(value)
            except ValueError:
                raise ParseError(f"malformed feature {token!r}", line_number) from None
            if index < 1:
                raise ParseError(f"feature indices are 1-based, got {index}", line_number)
            if index <= previous:
                raise ParseError("feature indices must be increasing", line_number)
            previous = index
        max_index = max(max_index, previous)
        samples += 1

    if samples == 0:
        raise DataError(f"Dataset file has no samples: {path}")
    return max_index


def load_sparse(
    path, task: str | None = None, name: str | None = None, n_features: int | None = None
) -> Dataset:
    path = Path(path)
    _check_file(path)
    max_index = _scan_sparse(path)
    if n_features is not None and n_features < max_index:
        raise DataError(
            f"{path.name} uses feature index {max_index} but n_features={n_features}"
        )

    try:
        X, y = load_svmlight_file(
            str(path),
            n_features=n_features or max(max_index, 1),
            dtype=np.float64,
            zero_based=False,
        )
    except ValueError as e:
        raise ParseError(f"{path.name}: {e}") from e

    dataset = Dataset(
        features=X.toarray(),
        targets=y,
        task=_infer_task(y, task),
        name=name or path.stem,
    )
    logger.info(
        "Loaded %s: %d samples x %d features (%s)",
        path.name, dataset.n, dataset.d, dataset.task,
    )
    return dataset


def load_dataset(path, task: str | None = None) -> Dataset:
    """Pick the reader from the extension: .csv is dense, anything else sparse."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_dense_csv(path, task=task)
    return load_sparse(path, task=task)


def _format_target(value: float, task: str) -> str:
    if task == "classification":
        return "+1" if value > 0 else "-1"
    return repr(float(value))


def write_dense_csv(data: Dataset, path) -> Path:
    path = Path(path)
    frame = pd.DataFrame(data.features)
    frame[data.d] = data.targets
    frame.to_csv(path, header=False, index=False, lineterminator="\n")
    return path


def write_sparse(data: Dataset, path) -> Path:
    path = Path(path)
    lines = []
    for row, target in zip(data.features, data.targets):
        entries = [
            f"{j + 1}:{float(v)!r}" for j, v in enumerate(row) if v != 0.0
        ]
        lines.append(" ".join([_format_target(target, data.task)] + entries))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_dataset(data: Dataset, path) -> Path:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return write_dense_csv(data, path)
    return write_sparse(data, path)
