"""
Model - Learner types and the forward pass

An SCN is a single-hidden-layer expansion f_L = sum_j beta_j g_j where every
hidden node g_j is a random basis function g(w_j . x + b_j). This module holds
the node and model types together with hidden-activation evaluation,
prediction and residual computation.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from .data import NormMeta
from .linalg import DimensionError, as_matrix, check_finite


class ActivationKind(str, Enum):
    """Hidden-node activation families."""

    SIGMOID = "sigmoid"
    TANH = "tanh"
    GAUSSIAN = "gaussian"
    SINE = "sine"
    COSINE = "cosine"

    @classmethod
    def parse(cls, value) -> "ActivationKind":
        """Accept an ActivationKind or its (case-insensitive) name."""
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            options = ", ".join(kind.value for kind in cls)
            raise ValueError(f"Unknown activation '{value}' (expected one of: {options})")


def _gaussian(t: np.ndarray) -> np.ndarray:
    return np.exp(-np.square(t))


ACTIVATIONS: Dict[ActivationKind, Callable[[np.ndarray], np.ndarray]] = {
    ActivationKind.SIGMOID: expit,
    ActivationKind.TANH: np.tanh,
    ActivationKind.GAUSSIAN: _gaussian,
    ActivationKind.SINE: np.sin,
    ActivationKind.COSINE: np.cos,
}


def activate(kind: ActivationKind, t: np.ndarray) -> np.ndarray:
    """Apply the activation ``kind`` elementwise to pre-activations ``t``."""
    return ACTIVATIONS[ActivationKind.parse(kind)](t)


@dataclass(frozen=True, eq=False)
class HiddenNode:
    """
    One random basis function.

    Attributes:
        w: Input weight vector, length d
        b: Bias
        activation: Activation family
        lambda_used: Scope the parameters were drawn from, w and b in [-lambda, lambda]
    """

    w: np.ndarray
    b: float
    activation: ActivationKind = ActivationKind.SIGMOID
    lambda_used: float = 1.0

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "activation", ActivationKind.parse(self.activation))
        if self.lambda_used <= 0:
            raise ValueError(f"lambda_used must be positive, got {self.lambda_used}")
        check_finite(w, "node weights")
        if not np.isfinite(self.b):
            raise ValueError("node bias must be finite")

    @property
    def input_dim(self) -> int:
        return self.w.shape[0]


def node_activation_vector(node: HiddenNode, X) -> np.ndarray:
    """
    Activation column h of one hidden node over all samples.

    Args:
        node: Hidden node
        X: Normalized inputs, N x d

    Returns:
        Vector of length N with h_i = g(w . x_i + b)
    """
    X = as_matrix(X, "X")
    if X.shape[1] != node.input_dim:
        raise DimensionError(
            f"X has {X.shape[1]} columns but the node expects {node.input_dim}"
        )
    return activate(node.activation, X @ node.w + node.b)


def hidden_matrix(nodes: Sequence[HiddenNode], X) -> np.ndarray:
    """Stack node activation columns into H (N x L); L = 0 gives an N x 0 array."""
    X = as_matrix(X, "X")
    if not nodes:
        return np.zeros((X.shape[0], 0))
    return np.column_stack([node_activation_vector(node, X) for node in nodes])


@dataclass(frozen=True, eq=False)
class ScnModel:
    """
    Deployable SCN predictor.

    Normalization metadata is part of the model so a persisted model maps raw
    inputs to raw target scale on its own.

    Attributes:
        input_dim: Number of inputs d
        output_dim: Number of outputs m
        nodes: Hidden nodes in construction order
        output_weights: Output weight matrix, L x m
        norm_meta: Min/max of inputs and targets used for normalization
        activation: Activation family shared by the nodes
    """

    input_dim: int
    output_dim: int
    nodes: Tuple[HiddenNode, ...]
    output_weights: np.ndarray
    norm_meta: NormMeta
    activation: ActivationKind = ActivationKind.SIGMOID
    training_summary: Dict[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "activation", ActivationKind.parse(self.activation))
        weights = np.array(self.output_weights, dtype=np.float64)
        if weights.size == 0:
            weights = np.zeros((len(self.nodes), self.output_dim))
        if weights.ndim == 1 and self.output_dim == 1:
            weights = weights.reshape(-1, 1)
        if weights.shape != (len(self.nodes), self.output_dim):
            raise DimensionError(
                f"output_weights shape {weights.shape} does not match "
                f"({len(self.nodes)}, {self.output_dim})"
            )
        weights.setflags(write=False)
        object.__setattr__(self, "output_weights", weights)

        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be at least 1")
        if self.norm_meta.input_dim != self.input_dim:
            raise DimensionError("norm_meta input entries do not match input_dim")
        if self.norm_meta.output_dim != self.output_dim:
            raise DimensionError("norm_meta target entries do not match output_dim")
        for node in self.nodes:
            if node.input_dim != self.input_dim:
                raise DimensionError("node weight length does not match input_dim")
        check_finite(weights, "output_weights")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def hidden_matrix(self, X_norm) -> np.ndarray:
        """Hidden activation matrix H (N x L) for already-normalized inputs."""
        return hidden_matrix(self.nodes, X_norm)

    def predict_normalized(self, X_raw) -> np.ndarray:
        """Prediction in normalized target space."""
        X_raw = as_matrix(X_raw, "X_raw")
        if X_raw.shape[1] != self.input_dim:
            raise DimensionError(
                f"X has {X_raw.shape[1]} columns but the model expects {self.input_dim}"
            )
        X_norm = self.norm_meta.normalize_x(X_raw)
        if not self.nodes:
            return np.zeros((X_raw.shape[0], self.output_dim))
        return self.hidden_matrix(X_norm) @ self.output_weights

    def predict(self, X_raw) -> np.ndarray:
        """Prediction in original target scale."""
        return self.norm_meta.denormalize_t(self.predict_normalized(X_raw))

    def prefix(self, n_nodes: int) -> "ScnModel":
        """Model made of the first ``n_nodes`` nodes and their weight rows."""
        return ScnModel(
            input_dim=self.input_dim,
            output_dim=self.output_dim,
            nodes=self.nodes[:n_nodes],
            output_weights=self.output_weights[:n_nodes],
            norm_meta=self.norm_meta,
            activation=self.activation,
        )


def predict(model: ScnModel, X_raw) -> np.ndarray:
    """Predict targets in original scale for raw inputs (N x d -> N x m)."""
    return model.predict(X_raw)


def residual(H, B, T) -> np.ndarray:
    """
    Residual e = T - H B.

    Args:
        H: Hidden activation matrix, N x L (L may be 0)
        B: Output weights, L x m
        T: Targets, N x m

    Returns:
        Residual matrix, N x m; equals T when L = 0
    """
    T = as_matrix(T, "T")
    H = np.asarray(H, dtype=np.float64)
    if H.ndim == 1:
        H = H.reshape(-1, 1)
    if H.shape[0] != T.shape[0]:
        raise DimensionError(f"H has {H.shape[0]} rows, T has {T.shape[0]}")
    if H.shape[1] == 0:
        return T.copy()
    check_finite(H, "H")
    B = np.asarray(B, dtype=np.float64).reshape(H.shape[1], -1)
    if B.shape[1] != T.shape[1]:
        raise DimensionError(f"B has {B.shape[1]} columns, T has {T.shape[1]}")
    check_finite(B, "B")
    return T - H @ B


def empty_model(input_dim: int, output_dim: int, norm_meta: Optional[NormMeta] = None,
                activation: ActivationKind = ActivationKind.SIGMOID) -> ScnModel:
    """Zero-node model (f_0 = 0)."""
    if norm_meta is None:
        norm_meta = NormMeta.identity(input_dim, output_dim)
    return ScnModel(
        input_dim=input_dim,
        output_dim=output_dim,
        nodes=(),
        output_weights=np.zeros((0, output_dim)),
        norm_meta=norm_meta,
        activation=activation,
    )
