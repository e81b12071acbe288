"""
Artifact writers: traces, sweeps, grid-search results, model records, run manifests.

Every JSON document carries a "version" field. Nothing time-dependent is
written, so re-running a command reproduces its files byte for byte.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from core.aggregate import all_aggregates
from core.errors import DataError
from core.losses import IndividualLoss, sample_losses
from ingestion.dataset import Dataset
from optimization.sgd import ModelState, TrainConfig
from optimization.svm_dual import DualSolution

FORMAT_VERSION = 1
LINEAR_MODEL = "matk-linear"
DUAL_MODEL = "atk-svm"


def write_json(record: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(record, f, indent=2)
        f.write("\n")
    return path


def read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"File not found: {path}")
    try:
        with open(path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"{path.name} is not valid JSON: {e}") from e


def _write_frame(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n", float_format="%.10g")
    return path


def write_trace_csv(trace, path) -> Path:
    """Rows (iteration, objective)."""
    return _write_frame(pd.DataFrame(trace, columns=["iteration", "objective"]), path)


def write_sweep_csv(rows, path) -> Path:
    """Rows (k, mean, std) of a k sweep."""
    return _write_frame(pd.DataFrame(rows, columns=["k", "mean", "std"]), path)


def linear_model_record(
    state: ModelState,
    loss: IndividualLoss,
    aggregate: str,
    config: TrainConfig,
    data: Dataset,
    final_objective: float,
) -> dict:
    losses = sample_losses(loss, data.features, data.targets, state.w)
    return {
        "version": FORMAT_VERSION,
        "kind": LINEAR_MODEL,
        "loss": loss.kind,
        "task": loss.task,
        "aggregate": aggregate,
        "train": config.to_dict(),
        "n_train": int(data.n),
        "model": state.to_dict(),
        "objective": float(final_objective),
        "training_aggregates": all_aggregates(losses, config.k),
    }


def dual_model_record(sol: DualSolution, nu_fractions: tuple[float, float] | None = None) -> dict:
    """nu_fractions is (support_fraction, margin_error_fraction), or None when the check was not run."""
    record = {
        "version": FORMAT_VERSION,
        "kind": DUAL_MODEL,
        "task": "classification",
        "model": sol.to_dict(),
        "nu_property": None,
    }
    if nu_fractions is not None:
        support_fraction, margin_error_fraction = nu_fractions
        record["nu_property"] = {
            "nu": sol.k / sol.n,
            "support_fraction": support_fraction,
            "margin_error_fraction": margin_error_fraction,
            "holds": bool(margin_error_fraction <= sol.k / sol.n <= support_fraction),
        }
    return record


def load_model(path):
    """
    Returns:
        (kind, model, record) where model is a ModelState or a DualSolution.
    """
    record = read_json(path)
    if record.get("version") != FORMAT_VERSION:
        raise DataError(f"Unsupported model format version {record.get('version')!r} in {path}")
    kind = record.get("kind")
    if kind == LINEAR_MODEL:
        return kind, ModelState.from_dict(record["model"]), record
    if kind == DUAL_MODEL:
        return kind, DualSolution.from_dict(record["model"]), record
    raise DataError(f"Unknown model kind {kind!r} in {path}")


def model_scores(model, data: Dataset) -> np.ndarray:
    """Real-valued predictions of either model kind on a dataset."""
    if isinstance(model, DualSolution):
        return model.decision_values(data.features)
    return model.predict(data.features)


def grid_record(result, params: dict) -> dict:
    return {"version": FORMAT_VERSION, "params": params, "result": result.to_dict()}


def format_summary_table(results: dict, title: str, percent: bool = True) -> str:
    """
    One line per objective: "name  mean(std)  k*  C*". Classification errors
    are shown in percent.
    """
    scale = 100.0 if percent else 1.0
    lines = [title, f"{'objective':<10} {'test':>18} {'k*':>6} {'C*':>10}"]
    for name, result in results.items():
        cell = f"{result.mean * scale:.2f}({result.std * scale:.2f})" if percent else (
            f"{result.mean:.4f}({result.std:.4f})"
        )
        lines.append(f"{name:<10} {cell:>18} {result.best_k:>6d} {result.best_C:>10g}")
    return "\n".join(lines) + "\n"


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    tool_version: str
    argv: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"version": FORMAT_VERSION, **asdict(self)}

    def write(self, path) -> Path:
        return write_json(self.to_dict(), path)

    @classmethod
    def load(cls, path) -> "RunManifest":
        record = read_json(path)
        try:
            return cls(
                command=record["command"],
                config=record["config"],
                seed=int(record["seed"]),
                tool_version=record["tool_version"],
                argv=list(record.get("argv", [])),
                outputs=list(record.get("outputs", [])),
            )
        except KeyError as e:
            raise DataError(f"Manifest {path} lacks field {e}") from e


def manifest_path(out_path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.name + ".manifest.json")
