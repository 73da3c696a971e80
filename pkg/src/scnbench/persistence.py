"""
Persistence - Model files and per-node training reports

Models are stored as JSON documents holding the hidden nodes, output weights
and normalization statistics; floats are written with full round-trip
precision so a reloaded model predicts exactly like the original. Training
reports are CSV files with one row per accepted node.
"""

import csv
import json
import os
from typing import Any, Dict, List, Optional

import numpy as np

from .data import NormMeta
from .model import ActivationKind, HiddenNode, ScnModel
from .trainer import TrainingTrace


FORMAT_VERSION = 1

REPORT_FIELDS = [
    "L",
    "train_rmse",
    "test_rmse",
    "r_at_acceptance",
    "lambda_used",
    "candidates_tried",
    "elapsed_s",
]


class ModelFileError(ValueError):
    """Raised for unreadable or unsupported model files."""


def _ensure_parent(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def model_to_dict(model: ScnModel) -> Dict[str, Any]:
    """Serializable representation of a model."""
    return {
        "format_version": FORMAT_VERSION,
        "input_dim": model.input_dim,
        "output_dim": model.output_dim,
        "activation": model.activation.value,
        "nodes": [
            {
                "w": [float(v) for v in node.w],
                "b": float(node.b),
                "lambda_used": float(node.lambda_used),
            }
            for node in model.nodes
        ],
        "output_weights": [[float(v) for v in row] for row in model.output_weights],
        "norm_meta": model.norm_meta.to_dict(),
        "training_summary": dict(model.training_summary),
    }


def model_from_dict(data: Dict[str, Any]) -> ScnModel:
    """Rebuild a model from ``model_to_dict`` output."""
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"Unsupported model format_version: {version}")
    try:
        activation = ActivationKind.parse(data["activation"])
        output_dim = int(data["output_dim"])
        nodes = [
            HiddenNode(w=node["w"], b=node["b"], activation=activation,
                       lambda_used=node["lambda_used"])
            for node in data["nodes"]
        ]
        weights = np.asarray(data["output_weights"], dtype=np.float64).reshape(len(nodes), output_dim)
        return ScnModel(
            input_dim=int(data["input_dim"]),
            output_dim=output_dim,
            nodes=tuple(nodes),
            output_weights=weights,
            norm_meta=NormMeta.from_dict(data["norm_meta"]),
            activation=activation,
            training_summary=dict(data.get("training_summary", {})),
        )
    except (KeyError, TypeError) as e:
        raise ModelFileError(f"Malformed model file: {e}")


def dumps_model(model: ScnModel) -> str:
    """JSON text of a model (stable key order, two-space indent)."""
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def save_model(model: ScnModel, path: str) -> str:
    """
    Save a model as JSON.

    Args:
        model: Model to save
        path: Target file path

    Returns:
        Path to saved file
    """
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_model(model))
    return path


def load_model(path: str) -> ScnModel:
    """Load a model saved by ``save_model``."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Model file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ModelFileError(f"Failed to read model file {path}: {e}")
    if not isinstance(data, dict):
        raise ModelFileError(f"Model file {path} must hold a JSON object")
    return model_from_dict(data)


def _cell(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def report_rows(trace: TrainingTrace) -> List[Dict[str, str]]:
    """One CSV row per accepted node."""
    return [
        {
            "L": str(rec.L),
            "train_rmse": _cell(rec.train_rmse),
            "test_rmse": _cell(rec.test_rmse),
            "r_at_acceptance": _cell(rec.r_at_acceptance),
            "lambda_used": _cell(rec.lambda_used),
            "candidates_tried": str(rec.candidates_tried),
            "elapsed_s": f"{rec.elapsed:.6f}",
        }
        for rec in trace.records
    ]


def write_report(trace: TrainingTrace, path: str) -> str:
    """
    Write the per-node training report CSV.

    Args:
        trace: Training trace
        path: Target file path

    Returns:
        Path to saved file
    """
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=REPORT_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(report_rows(trace))
    return path


def read_report(path: str) -> List[Dict[str, str]]:
    """Read a report CSV back as a list of row dicts."""
    with open(path, "r", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
