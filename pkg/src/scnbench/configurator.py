"""
Configurator - Hidden-node configuration under the supervisory inequality

Phase 1 of every SC algorithm: draw random hidden-node candidates over the
scope set Upsilon, score each one against the current residual and keep the
best admissible node. When no candidate in a round is admissible the
contraction index r is increased and the round repeated.

This module also owns ScnConfig, the hyperparameter set shared by all
construction algorithms, and the seeded random streams that make every draw
reproducible.
"""

import dataclasses
import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import yaml

from .linalg import DimensionError, as_matrix
from .model import ActivationKind, HiddenNode, activate


DEFAULT_UPSILON: Tuple[float, ...] = (1.0, 5.0, 15.0, 30.0, 50.0, 100.0, 150.0, 200.0)

# Candidates whose activation column has squared norm below this are discarded
DEGENERATE_FLOOR = 1e-300

_U64 = 2 ** 64

# Stream namespaces for SeedSequence spawn keys
_CANDIDATE_STREAM = 0
_TAU_STREAM = 1
_TRIAL_STREAM = 2


class ConfigError(ValueError):
    """Raised for invalid construction hyperparameters."""


class DegenerateCandidateError(ValueError):
    """Raised when a candidate's activation column is (numerically) zero."""


class Algorithm(str, Enum):
    """Construction algorithm variants."""

    SC1 = "sc1"
    SC2 = "sc2"
    SC3 = "sc3"
    IRVFL = "irvfl"

    @classmethod
    def parse(cls, value) -> "Algorithm":
        """Accept 'sc1', 'SC-I', 'sc-ii', 'irvfl', ... or an Algorithm."""
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {"sci": "sc1", "scii": "sc2", "sciii": "sc3"}
        text = aliases.get(text, text)
        try:
            return cls(text)
        except ValueError:
            raise ConfigError(
                f"Unknown algorithm '{value}' (expected sc1, sc2, sc3 or irvfl)"
            )

    @property
    def label(self) -> str:
        return {"sc1": "SC-I", "sc2": "SC-II", "sc3": "SC-III", "irvfl": "IRVFL"}[self.value]


class TauMode(str, Enum):
    """How r grows after a round without admissible candidates."""

    RANDOM = "random"
    DETERMINISTIC_HALF = "deterministic-half"


class ToleranceMetric(str, Enum):
    """Quantity compared against epsilon by the stopping test."""

    RMSE = "rmse"
    FROBENIUS = "frobenius"


def _enum_value(value) -> str:
    return str(getattr(value, "value", value)).lower()


def _as_float_tuple(values) -> Tuple[float, ...]:
    if isinstance(values, str):
        values = [v for v in values.split(",") if v.strip()]
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class ScnConfig:
    """
    Construction hyperparameters.

    Attributes:
        l_max: Maximum number of hidden nodes
        epsilon: Expected error tolerance
        t_max: Candidate draws per scope round
        upsilon: Ordered scope values lambda, each > 0
        r0: Initial contraction index in (0,1), reset at every node search
        max_r_rounds_per_lambda: Rounds tried per lambda before moving on
        tau_mode: Growth rule for r after a failed round
        window: Window size K (SC-II only)
        algorithm: sc1, sc2, sc3 or irvfl
        seed: Master seed (64-bit)
        activation: Hidden activation family
        tolerance_metric: rmse (||e||_F / sqrt(N) <= epsilon) or frobenius
        r_schedule: Optional increasing sequence of r values used instead of tau growth
        solve_rel_cutoff: Pseudoinverse cutoff; None uses max(N, L) * 1e-12
    """

    l_max: int = 50
    epsilon: float = 0.05
    t_max: int = 200
    upsilon: Tuple[float, ...] = DEFAULT_UPSILON
    r0: float = 0.9
    max_r_rounds_per_lambda: int = 5
    tau_mode: TauMode = TauMode.DETERMINISTIC_HALF
    window: Optional[int] = None
    algorithm: Algorithm = Algorithm.SC3
    seed: int = 0
    activation: ActivationKind = ActivationKind.SIGMOID
    tolerance_metric: ToleranceMetric = ToleranceMetric.RMSE
    r_schedule: Optional[Tuple[float, ...]] = None
    solve_rel_cutoff: Optional[float] = None

    def __post_init__(self):
        try:
            normalized = {
                "algorithm": Algorithm.parse(self.algorithm),
                "tau_mode": TauMode(_enum_value(self.tau_mode)),
                "tolerance_metric": ToleranceMetric(_enum_value(self.tolerance_metric)),
                "activation": ActivationKind.parse(self.activation),
                "upsilon": _as_float_tuple(self.upsilon),
                "seed": int(self.seed) % _U64,
            }
            if self.r_schedule is not None:
                normalized["r_schedule"] = _as_float_tuple(self.r_schedule)
        except ValueError as e:
            raise ConfigError(str(e))
        for name, value in normalized.items():
            object.__setattr__(self, name, value)
        self.validate()

    def validate(self) -> None:
        """Check the invariants; raises ConfigError."""
        if self.l_max < 0:
            raise ConfigError(f"l_max must be non-negative, got {self.l_max}")
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.t_max < 1:
            raise ConfigError(f"t_max must be at least 1, got {self.t_max}")
        if not self.upsilon:
            raise ConfigError("upsilon must contain at least one scope value")
        if any(lam <= 0 or not np.isfinite(lam) for lam in self.upsilon):
            raise ConfigError(f"upsilon values must be positive, got {self.upsilon}")
        if not (0.0 < self.r0 < 1.0):
            raise ConfigError(f"r0 must lie in (0,1), got {self.r0}")
        if self.max_r_rounds_per_lambda < 1:
            raise ConfigError("max_r_rounds_per_lambda must be at least 1")
        if self.algorithm == Algorithm.SC2 and (self.window is None or self.window < 1):
            raise ConfigError("SC-II requires a window size K >= 1")
        if self.window is not None and self.window < 1:
            raise ConfigError(f"window must be at least 1, got {self.window}")
        if self.r_schedule is not None:
            sched = self.r_schedule
            if not sched or any(not (0.0 < r < 1.0) for r in sched):
                raise ConfigError("r_schedule values must lie in (0,1)")
            if any(b <= a for a, b in zip(sched, sched[1:])):
                raise ConfigError("r_schedule must be strictly increasing")
        if self.solve_rel_cutoff is not None and not (0.0 < self.solve_rel_cutoff < 1e-3):
            raise ConfigError("solve_rel_cutoff must lie in (0, 1e-3)")

    def replace(self, **changes) -> "ScnConfig":
        """Copy with the given fields changed (re-validated)."""
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, Enum):
                data[key] = value.value
            elif isinstance(value, tuple):
                data[key] = list(value)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScnConfig":
        """Build a config from a mapping; unknown keys raise ConfigError."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        return cls(**data)


def load_config(config_file: Optional[str] = None, **overrides) -> ScnConfig:
    """
    Load configuration from a YAML or JSON file and merge it over the defaults.

    Args:
        config_file: Optional path to a .yaml/.yml or .json file
        **overrides: Values applied after the file (None values are ignored)

    Returns:
        Validated ScnConfig
    """
    merged: Dict[str, Any] = {}
    if config_file:
        if not os.path.exists(config_file):
            raise ConfigError(f"Config file not found: {config_file}")
        with open(config_file, "r") as f:
            if config_file.endswith((".yaml", ".yml")):
                user_config = yaml.safe_load(f) or {}
            else:
                user_config = json.load(f)
        if not isinstance(user_config, dict):
            raise ConfigError(f"Config file {config_file} must hold a mapping")
        merged.update(user_config)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return ScnConfig.from_dict(merged)


@dataclass(frozen=True)
class RngStream:
    """
    Seeded random stream addressed by a derivation path.

    The same (seed, path) always yields the same draws, independent of the
    order in which streams are created or consumed.
    """

    seed: int
    path: Tuple[int, ...] = ()

    def child(self, *keys: int) -> "RngStream":
        return RngStream(self.seed, self.path + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=int(self.seed) % _U64, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))

    def candidate(self, node_index: int, lambda_index: int, round_index: int,
                  trial: int) -> "RngStream":
        """Stream for one candidate draw."""
        return self.child(_CANDIDATE_STREAM, node_index, lambda_index, round_index, trial)

    def tau(self, node_index: int, round_index: int) -> "RngStream":
        """Stream for the random r increment of one round."""
        return self.child(_TAU_STREAM, node_index, round_index)

    def trial_seed(self, trial: int) -> int:
        """Independent 64-bit seed for trial ``trial``."""
        seq = np.random.SeedSequence(entropy=int(self.seed) % _U64,
                                     spawn_key=self.path + (_TRIAL_STREAM, int(trial)))
        return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, eq=False)
class CandidateScore:
    """
    Scored hidden-node candidate.

    Attributes:
        node: The candidate node
        h: Activation column, length N
        xi_per_output: xi_{L,q} for every output q
        xi_total: Sum of xi_per_output
        projection_sq: (e_q . h)^2 / (h . h) per output
        residual_sq: e_q . e_q per output (residual before the node)
        r: Contraction index in effect at acceptance
        mu: mu_L in effect at acceptance
        lambda_index: Index of the scope value the node was drawn from
        trial: Trial index within its round
        candidates_tried: Candidates drawn during the whole search
    """

    node: HiddenNode
    h: np.ndarray
    xi_per_output: np.ndarray
    xi_total: float
    projection_sq: np.ndarray
    residual_sq: np.ndarray
    r: float
    mu: float
    lambda_index: int = 0
    trial: int = 0
    candidates_tried: int = 0

    @property
    def admissible(self) -> bool:
        return bool(np.min(self.xi_per_output) >= 0.0)


@dataclass(frozen=True)
class Stalled:
    """No admissible candidate was found for any scope value."""

    r: float
    candidates_tried: int


SearchOutcome = Union[CandidateScore, Stalled]


def mu_L(r: float, L: int) -> float:
    """
    Vanishing slack mu_L = (1 - r) / (L + 1).

    Args:
        r: Contraction index in (0,1)
        L: Index of the node being added (>= 1)
    """
    if not (0.0 < r < 1.0):
        raise ValueError(f"r must lie in (0,1), got {r}")
    if L < 1:
        raise ValueError(f"L must be at least 1, got {L}")
    return (1.0 - r) / (L + 1)


def _score_block(e: np.ndarray, Hc: np.ndarray, r: float, mu: float):
    """Vectorised xi scores for candidate columns Hc (N x T)."""
    hh = np.einsum("ij,ij->j", Hc, Hc)
    degenerate = hh < DEGENERATE_FLOOR
    safe_hh = np.where(degenerate, 1.0, hh)
    eh = e.T @ Hc
    proj = np.square(eh) / safe_hh
    ee = np.einsum("ij,ij->j", e, e)
    xi = proj - (1.0 - r - mu) * ee[:, None]
    return xi, proj, ee, degenerate


def xi_scores(e, h, r: float, mu: float) -> Tuple[np.ndarray, float]:
    """
    Supervisory scores of one candidate activation column.

    xi_q = (e_q . h)^2 / (h . h) - (1 - r - mu) * (e_q . e_q)

    Args:
        e: Residual matrix, N x m
        h: Candidate activation column, length N
        r: Contraction index in (0,1)
        mu: Slack, with r + mu < 1

    Returns:
        Tuple of (xi per output, xi total)

    Raises:
        DegenerateCandidateError: If h . h is (numerically) zero
    """
    e = as_matrix(e, "e")
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    if h.shape[0] != e.shape[0]:
        raise DimensionError(f"h has length {h.shape[0]}, residual has {e.shape[0]} rows")
    if not (0.0 < r < 1.0) or mu < 0 or r + mu >= 1.0:
        raise ValueError(f"need 0 < r < 1, mu >= 0 and r + mu < 1 (r={r}, mu={mu})")
    xi, _, _, degenerate = _score_block(e, h.reshape(-1, 1), r, mu)
    if degenerate[0]:
        raise DegenerateCandidateError("candidate activation column is zero")
    per_output = xi[:, 0]
    return per_output, float(per_output.sum())


def sample_candidate(lam: float, d: int, activation: ActivationKind,
                     rng: RngStream) -> HiddenNode:
    """
    Draw one hidden node with w and b independently uniform on [-lam, lam].

    Args:
        lam: Scope value, > 0
        d: Input dimension
        activation: Activation family
        rng: Stream addressed to this draw

    Returns:
        HiddenNode recording ``lam`` as lambda_used
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    params = rng.generator().uniform(-lam, lam, size=d + 1)
    return HiddenNode(w=params[:d], b=params[d], activation=activation, lambda_used=lam)


def grow_r(r: float, cfg: ScnConfig, rng: RngStream) -> Optional[float]:
    """
    Next contraction index after a failed round, or None if r cannot grow.

    With an r_schedule the next larger scheduled value is used; otherwise r is
    increased by tau in (0, 1 - r), either (1 - r) / 2 or uniformly random.
    """
    if cfg.r_schedule is not None:
        for value in cfg.r_schedule:
            if value > r:
                return value
        return None
    if cfg.tau_mode == TauMode.RANDOM:
        u = rng.generator().uniform(0.0, 1.0)
        tau = (u if u > 0.0 else 0.5) * (1.0 - r)
    else:
        tau = 0.5 * (1.0 - r)
    grown = r + tau
    if grown >= 1.0 or grown <= r:
        return None
    return grown


def find_best_node(e, X, cfg: ScnConfig, L: int, r: Optional[float] = None,
                   rng: Optional[RngStream] = None) -> SearchOutcome:
    """
    Search for the best admissible hidden node for position L.

    The search runs in rounds. A round walks Upsilon in order and draws T_max
    candidates per lambda; the first lambda with an admissible candidate
    (min_q xi_q >= 0) wins, and among its candidates the largest xi_total is
    accepted, ties going to the lowest trial index. When a whole round fails,
    r grows and the next round starts again from the first lambda. Each lambda
    is therefore tried at most ``max_r_rounds_per_lambda`` times, the first
    round included.

    Args:
        e: Current residual, N x m
        X: Normalized inputs, N x d
        cfg: Construction hyperparameters
        L: Index of the node being added (>= 1)
        r: Starting contraction index (defaults to cfg.r0)
        rng: Root stream (defaults to RngStream(cfg.seed))

    Returns:
        CandidateScore of the accepted node (carrying the r in effect), or Stalled
    """
    e = as_matrix(e, "e")
    X = as_matrix(X, "X")
    if e.shape[0] != X.shape[0]:
        raise DimensionError(f"residual has {e.shape[0]} rows, X has {X.shape[0]}")
    r = cfg.r0 if r is None else float(r)
    rng = rng or RngStream(cfg.seed)
    d = X.shape[1]
    tried = 0

    for round_index in range(cfg.max_r_rounds_per_lambda):
        mu = mu_L(r, L)
        for j, lam in enumerate(cfg.upsilon):
            nodes = [sample_candidate(lam, d, cfg.activation,
                                      rng.candidate(L, j, round_index, t))
                     for t in range(cfg.t_max)]
            tried += len(nodes)
            W = np.stack([node.w for node in nodes], axis=1)
            b = np.array([node.b for node in nodes])
            Hc = activate(cfg.activation, X @ W + b)

            xi, proj, ee, degenerate = _score_block(e, Hc, r, mu)
            if degenerate.any():
                logging.warning(f"⚠️  Discarded {int(degenerate.sum())} degenerate candidate(s) "
                                f"at node {L}, lambda={lam:g}")
            admissible = (xi.min(axis=0) >= 0.0) & ~degenerate
            if admissible.any():
                totals = np.where(admissible, xi.sum(axis=0), -np.inf)
                best = int(np.argmax(totals))
                logging.debug(f"Node {L}: accepted trial {best} at lambda={lam:g}, "
                              f"r={r:.6f} after {tried} candidates")
                return CandidateScore(
                    node=nodes[best],
                    h=Hc[:, best].copy(),
                    xi_per_output=xi[:, best].copy(),
                    xi_total=float(totals[best]),
                    projection_sq=proj[:, best].copy(),
                    residual_sq=ee.copy(),
                    r=r,
                    mu=mu,
                    lambda_index=j,
                    trial=best,
                    candidates_tried=tried,
                )

        grown = grow_r(r, cfg, rng.tau(L, round_index))
        if grown is None:
            break
        r = grown

    logging.warning(f"⚠️  Node {L}: no admissible candidate after {tried} draws (r={r:.6f})")
    return Stalled(r=r, candidates_tried=tried)
