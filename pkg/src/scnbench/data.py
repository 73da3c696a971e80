"""
Data - Dataset synthesis, CSV ingestion, normalization, splitting and metrics

Datasets are plain (X, T) matrix pairs. Inputs and targets are min-max
normalized into [0, 1] with statistics fitted on the training partition and
carried along so predictions can be mapped back to the original scale.
"""

import csv
import math
import os
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import expit

from .linalg import DimensionError, as_matrix


DB1_PROVENANCE = "synthetic-db1"


class DataParseError(ValueError):
    """
    Raised for malformed CSV input.

    Attributes:
        row: 1-based line number of the offending cell, if known
        column: 1-based column number of the offending cell, if known
    """

    def __init__(self, message: str, row: Optional[int] = None,
                 column: Optional[int] = None):
        if row is not None and column is not None:
            message = f"{message} at ({row},{column})"
        elif row is not None:
            message = f"{message} at row {row}"
        super().__init__(message)
        self.row = row
        self.column = column


def _scale(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    return np.where(span > 0, span, 1.0)


@dataclass(frozen=True, eq=False)
class NormMeta:
    """
    Per-column min/max of inputs and targets.

    Columns are mapped affinely so min -> 0 and max -> 1; constant columns map
    to 0.5 and invert back to their constant value.
    """

    x_min: np.ndarray
    x_max: np.ndarray
    t_min: np.ndarray
    t_max: np.ndarray

    def __post_init__(self):
        for name in ("x_min", "x_max", "t_min", "t_max"):
            arr = np.array(getattr(self, name), dtype=np.float64).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.x_min.shape != self.x_max.shape or self.t_min.shape != self.t_max.shape:
            raise DimensionError("min/max arrays must have matching lengths")

    @property
    def input_dim(self) -> int:
        return self.x_min.shape[0]

    @property
    def output_dim(self) -> int:
        return self.t_min.shape[0]

    @classmethod
    def fit(cls, X: np.ndarray, T: np.ndarray) -> "NormMeta":
        """Column statistics of X and T."""
        return cls(x_min=X.min(axis=0), x_max=X.max(axis=0),
                   t_min=T.min(axis=0), t_max=T.max(axis=0))

    @classmethod
    def identity(cls, input_dim: int, output_dim: int) -> "NormMeta":
        """Meta that leaves [0,1]-scaled data unchanged."""
        return cls(x_min=np.zeros(input_dim), x_max=np.ones(input_dim),
                   t_min=np.zeros(output_dim), t_max=np.ones(output_dim))

    @staticmethod
    def _forward(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        out = (values - lo) / _scale(lo, hi)
        return np.where(hi > lo, out, 0.5)

    @staticmethod
    def _inverse(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        out = values * _scale(lo, hi) + lo
        return np.where(hi > lo, out, lo)

    def normalize_x(self, X) -> np.ndarray:
        X = as_matrix(X, "X")
        if X.shape[1] != self.input_dim:
            raise DimensionError(f"X has {X.shape[1]} columns, expected {self.input_dim}")
        return self._forward(X, self.x_min, self.x_max)

    def normalize_t(self, T) -> np.ndarray:
        T = as_matrix(T, "T")
        if T.shape[1] != self.output_dim:
            raise DimensionError(f"T has {T.shape[1]} columns, expected {self.output_dim}")
        return self._forward(T, self.t_min, self.t_max)

    def denormalize_x(self, X) -> np.ndarray:
        return self._inverse(as_matrix(X, "X"), self.x_min, self.x_max)

    def denormalize_t(self, T) -> np.ndarray:
        return self._inverse(as_matrix(T, "T"), self.t_min, self.t_max)

    def to_dict(self) -> Dict[str, List[float]]:
        return {
            "x_min": [float(v) for v in self.x_min],
            "x_max": [float(v) for v in self.x_max],
            "t_min": [float(v) for v in self.t_min],
            "t_max": [float(v) for v in self.t_max],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, List[float]]) -> "NormMeta":
        return cls(x_min=data["x_min"], x_max=data["x_max"],
                   t_min=data["t_min"], t_max=data["t_max"])


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Input/target matrix pair.

    Attributes:
        X: Inputs, N x d
        T: Targets, N x m
        norm_meta: Normalization applied to X and T, None while still raw
        provenance: Origin label ("synthetic-db1", "csv:<path>", ...)
    """

    X: np.ndarray
    T: np.ndarray
    norm_meta: Optional[NormMeta] = None
    provenance: str = "memory"

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        T = as_matrix(self.T, "T")
        if X.shape[0] != T.shape[0]:
            raise DimensionError(f"X has {X.shape[0]} rows but T has {T.shape[0]}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "T", T)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def input_dim(self) -> int:
        return self.X.shape[1]

    @property
    def output_dim(self) -> int:
        return self.T.shape[1]

    @property
    def is_normalized(self) -> bool:
        return self.norm_meta is not None


@dataclass(frozen=True)
class SplitSpec:
    """Random train/test partition settings."""

    train_fraction: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError(f"train_fraction must lie in (0,1), got {self.train_fraction}")


def db1_target(x) -> np.ndarray:
    """
    DB1 regression function.

    f(x) = 0.2 exp(-(10x-4)^2) + 0.5 exp(-(80x-40)^2) + 0.3 exp(-(80x-20)^2)
    """
    x = np.asarray(x, dtype=np.float64)
    return (0.2 * np.exp(-np.square(10.0 * x - 4.0))
            + 0.5 * np.exp(-np.square(80.0 * x - 40.0))
            + 0.3 * np.exp(-np.square(80.0 * x - 20.0)))


def gen_db1(n_train: int = 1000, n_test: int = 300,
            seed: int = 0) -> Tuple[Dataset, Dataset]:
    """
    Generate the DB1 function-approximation task.

    Training inputs are i.i.d. uniform on [0,1]; test inputs form a regular grid
    over [0,1] including both endpoints and do not depend on the seed.

    Args:
        n_train: Number of training samples
        n_test: Number of test grid points
        seed: Seed for the training inputs

    Returns:
        Tuple of raw (un-normalized) train and test datasets
    """
    if n_train < 1 or n_test < 1:
        raise ValueError("n_train and n_test must be at least 1")
    rng = np.random.default_rng(seed)
    x_train = rng.uniform(0.0, 1.0, size=(n_train, 1))
    x_test = np.linspace(0.0, 1.0, n_test).reshape(-1, 1)
    train = Dataset(x_train, db1_target(x_train), provenance=DB1_PROVENANCE)
    test = Dataset(x_test, db1_target(x_test), provenance=DB1_PROVENANCE)
    return train, test


def gen_linear_sigmoid(n: int, input_dim: int = 9, seed: int = 0) -> Dataset:
    """
    Smooth multi-input generator used to exercise the CSV pipeline.

    The target is a weighted linear trend over all inputs plus a sigmoid ridge
    along the first two inputs, scaled to stay within [0,1].

    Args:
        n: Number of samples
        input_dim: Number of inputs (at least 2)
        seed: Seed for the inputs

    Returns:
        Raw dataset with ``input_dim`` inputs and one target
    """
    if n < 1 or input_dim < 2:
        raise ValueError("need n >= 1 and input_dim >= 2")
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(n, input_dim))
    coeffs = np.linspace(1.0, 0.2, input_dim)
    linear = X @ coeffs / coeffs.sum()
    ridge = expit(8.0 * (X[:, 0] - X[:, 1]))
    T = (0.5 * linear + 0.5 * ridge).reshape(-1, 1)
    return Dataset(X, T, provenance=f"synthetic-linear-sigmoid-{input_dim}d")


def _parse_cell(cell: str, row: int, column: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataParseError(f"non-numeric cell '{cell.strip()}'", row, column)
    if not math.isfinite(value):
        raise DataParseError(f"non-finite cell '{cell.strip()}'", row, column)
    return value


def _is_numeric_line(cells: List[str]) -> bool:
    for cell in cells:
        try:
            float(cell)
        except ValueError:
            return False
    return True


def load_csv(path: str, target_columns: int = 1) -> Dataset:
    """
    Load a numeric CSV file; the last ``target_columns`` columns are targets.

    A first line containing any non-numeric cell is treated as a header. Blank
    lines are ignored.

    Args:
        path: CSV file path
        target_columns: Number of trailing target columns m

    Returns:
        Raw (un-normalized) dataset

    Raises:
        DataParseError: For empty files, ragged rows or non-numeric cells
    """
    if target_columns < 1:
        raise ValueError("target_columns must be at least 1")
    if not os.path.exists(path):
        raise FileNotFoundError(f"Data file not found: {path}")

    rows: List[List[float]] = []
    width = None
    header_checked = False
    with open(path, "r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        for cells in reader:
            line = reader.line_num
            if not cells or all(not c.strip() for c in cells):
                continue
            if not header_checked:
                header_checked = True
                if not _is_numeric_line(cells):
                    width = len(cells)
                    continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise DataParseError(
                    f"ragged row: expected {width} columns, found {len(cells)}", line
                )
            rows.append([_parse_cell(cell, line, col)
                         for col, cell in enumerate(cells, start=1)])

    if not rows:
        raise DataParseError(f"no data rows in {path}")
    if width <= target_columns:
        raise DataParseError(
            f"{width} columns leave no inputs for {target_columns} target column(s)"
        )

    data = np.asarray(rows, dtype=np.float64)
    return Dataset(data[:, :-target_columns], data[:, -target_columns:],
                   provenance=f"csv:{path}")


def write_csv(path: str, dataset: Dataset, header: bool = True) -> str:
    """
    Write a dataset in the loader format (inputs first, targets last).

    Values are written with full round-trip precision.

    Returns:
        Path of the written file
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        if header:
            writer.writerow([f"x{i}" for i in range(1, dataset.input_dim + 1)]
                            + [f"t{q}" for q in range(1, dataset.output_dim + 1)])
        for x_row, t_row in zip(dataset.X, dataset.T):
            writer.writerow([repr(float(v)) for v in x_row]
                            + [repr(float(v)) for v in t_row])
    return path


def apply_normalization(dataset: Dataset, meta: NormMeta) -> Dataset:
    """Normalize a raw dataset with existing statistics (e.g. the training meta)."""
    if dataset.is_normalized:
        raise ValueError("dataset is already normalized")
    return replace(dataset, X=meta.normalize_x(dataset.X),
                   T=meta.normalize_t(dataset.T), norm_meta=meta)


def normalize_minmax(dataset: Dataset) -> Dataset:
    """
    Fit min-max statistics on ``dataset`` and map every column into [0,1].

    Returns:
        Normalized dataset with ``norm_meta`` populated
    """
    return apply_normalization(dataset, NormMeta.fit(dataset.X, dataset.T))


def split(dataset: Dataset, spec: SplitSpec = SplitSpec()) -> Tuple[Dataset, Dataset]:
    """
    Uniformly random train/test partition.

    The training part has ceil(train_fraction * N) rows, kept between 1 and
    N - 1 so both parts are non-empty.
    """
    n = dataset.n_samples
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    n_train = min(max(math.ceil(spec.train_fraction * n), 1), n - 1)
    perm = np.random.default_rng(spec.seed).permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    train = replace(dataset, X=dataset.X[train_idx], T=dataset.T[train_idx])
    test = replace(dataset, X=dataset.X[test_idx], T=dataset.T[test_idx])
    return train, test


def rmse(pred, target) -> float:
    """
    Root mean squared error, squared errors summed over outputs and averaged over N.

    Args:
        pred: Predictions, N x m
        target: Targets, N x m

    Returns:
        sqrt(sum_i sum_q (pred_iq - target_iq)^2 / N)
    """
    pred = as_matrix(pred, "pred")
    target = as_matrix(target, "target")
    if pred.shape != target.shape:
        raise DimensionError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return float(math.sqrt(np.sum(np.square(pred - target)) / pred.shape[0]))
