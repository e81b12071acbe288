"""
Wires a dataset file and a loss name into a checked training run, and sets
up logging for the command-line entry point.
"""

import logging
import sys
from dataclasses import dataclass

from core.errors import UsageError
from core.losses import IndividualLoss
from ingestion.dataset import Dataset
from ingestion.loader import load_dataset

TOOL_VERSION = "1.0.0"

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def configure_logging(verbose: bool = False) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


@dataclass(frozen=True)
class Run:
    data: Dataset
    loss: IndividualLoss


def build_run(data_path: str, loss_name: str, task: str | None = None) -> Run:
    """
    Load a dataset and pair it with a loss of the matching task.

    Without an explicit task it is inferred from the targets (all +-1 means
    classification); a loss meant for the other task is a usage error.
    """
    loss = IndividualLoss(loss_name)
    data = load_dataset(data_path, task=task)
    if data.task != loss.task:
        raise UsageError(
            f"{loss.kind} loss is for {loss.task} but '{data.name}' is a {data.task} dataset"
        )
    return Run(data=data, loss=loss)
