"""
Trainer - Construction loops for SC-I, SC-II, SC-III and the IRVFL baseline

Every algorithm grows the hidden layer one node at a time until the training
error meets the tolerance, the node budget is spent, or no admissible node can
be found. The algorithms differ in how nodes are chosen (supervised search vs.
a single unconstrained draw for IRVFL) and in how output weights are evaluated
after each addition.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)

from .configurator import (
    DEGENERATE_FLOOR,
    Algorithm,
    RngStream,
    ScnConfig,
    Stalled,
    ToleranceMetric,
    find_best_node,
    sample_candidate,
)
from .data import Dataset, rmse
from .linalg import SolveTolerance, frob_norm
from .model import HiddenNode, ScnModel, node_activation_vector, residual
from .weights import eval_constructive, eval_global, eval_window


class StopReason(str, Enum):
    """Why a construction run ended."""

    TOLERANCE_MET = "tolerance-met"
    NODE_BUDGET_EXHAUSTED = "node-budget-exhausted"
    STALLED = "stalled"


@dataclass(frozen=True)
class TraceRecord:
    """
    State after accepting node L.

    r_at_acceptance and mu_at_acceptance are None for IRVFL, which has no
    supervisory test. The per-output tuples hold the residual energy before the
    node and its projection onto the node, so the acceptance inequality can be
    re-evaluated from the trace alone.
    """

    L: int
    train_residual_frob: float
    train_rmse: float
    test_rmse: Optional[float]
    r_at_acceptance: Optional[float]
    mu_at_acceptance: Optional[float]
    lambda_used: float
    candidates_tried: int
    elapsed: float
    residual_frob_before: float
    residual_sq_before: Tuple[float, ...] = ()
    projection_sq: Tuple[float, ...] = ()
    xi_per_output: Tuple[float, ...] = ()


@dataclass
class TrainingTrace:
    """Per-node construction history of one run."""

    algorithm: Algorithm
    initial_residual_frob: float
    initial_train_rmse: float
    initial_test_rmse: Optional[float] = None
    records: List[TraceRecord] = field(default_factory=list)
    total_elapsed: float = 0.0

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TraceRecord]:
        return iter(self.records)

    @property
    def final_train_rmse(self) -> float:
        return self.records[-1].train_rmse if self.records else self.initial_train_rmse

    @property
    def final_test_rmse(self) -> Optional[float]:
        return self.records[-1].test_rmse if self.records else self.initial_test_rmse

    def residual_norms(self) -> np.ndarray:
        """||e_L||_F for L = 0..final L."""
        return np.array([self.initial_residual_frob]
                        + [rec.train_residual_frob for rec in self.records])


class TrainingRun(NamedTuple):
    """Result of one construction run."""

    model: ScnModel
    trace: TrainingTrace
    stop_reason: StopReason


def _tolerance_threshold(cfg: ScnConfig, n_samples: int) -> float:
    if cfg.tolerance_metric == ToleranceMetric.RMSE:
        return cfg.epsilon * math.sqrt(n_samples)
    return cfg.epsilon


def _draw_irvfl_node(X: np.ndarray, cfg: ScnConfig, L: int, rng: RngStream
                     ) -> Tuple[Optional[HiddenNode], Optional[np.ndarray], int]:
    """
    Unsupervised draw for IRVFL node L from the first scope value.

    Draws with an all-zero activation column are discarded and redrawn on the
    next trial path, up to T_max draws. Returns (None, None, tried) when every
    draw was degenerate.
    """
    for t in range(cfg.t_max):
        node = sample_candidate(cfg.upsilon[0], X.shape[1], cfg.activation,
                                rng.candidate(L, 0, 0, t))
        h = node_activation_vector(node, X)
        if float(h @ h) >= DEGENERATE_FLOOR:
            return node, h, t + 1
        logging.debug(f"Node {L}: discarded degenerate IRVFL draw {t}")
    logging.warning(f"⚠️  Node {L}: all {cfg.t_max} IRVFL draws were degenerate")
    return None, None, cfg.t_max


def train(dataset: Dataset, cfg: ScnConfig, test: Optional[Dataset] = None) -> TrainingRun:
    """
    Build an SCN (or IRVFL) model on a normalized dataset.

    Args:
        dataset: Normalized training data
        cfg: Construction hyperparameters; cfg.algorithm selects the variant
        test: Optional held-out data normalized with the training statistics,
            used only to record test RMSE per node

    Returns:
        TrainingRun(model, trace, stop_reason)
    """
    if not dataset.is_normalized:
        raise ValueError("training dataset must be normalized (see normalize_minmax)")
    if test is not None and not test.is_normalized:
        raise ValueError("test dataset must be normalized with the training statistics")
    if test is not None and (test.input_dim != dataset.input_dim
                             or test.output_dim != dataset.output_dim):
        raise ValueError("test dataset dimensions do not match the training dataset")

    X, T = dataset.X, dataset.T
    n, d = X.shape
    m = T.shape[1]
    algorithm = cfg.algorithm
    tol = SolveTolerance(cfg.solve_rel_cutoff) if cfg.solve_rel_cutoff else None
    threshold = _tolerance_threshold(cfg, n)
    rng = RngStream(cfg.seed)

    e = T.copy()
    B = np.zeros((0, m))
    nodes: List[HiddenNode] = []
    h_columns: List[np.ndarray] = []
    test_columns: List[np.ndarray] = []

    def test_rmse() -> Optional[float]:
        if test is None:
            return None
        if not test_columns:
            return rmse(np.zeros_like(test.T), test.T)
        return rmse(np.column_stack(test_columns) @ B, test.T)

    trace = TrainingTrace(
        algorithm=algorithm,
        initial_residual_frob=frob_norm(e),
        initial_train_rmse=frob_norm(e) / math.sqrt(n),
        initial_test_rmse=test_rmse(),
    )

    logging.info(f"🧪 Starting {algorithm.label} construction: N={n}, d={d}, m={m}, "
                 f"L_max={cfg.l_max}, seed={cfg.seed}")
    start = time.perf_counter()

    while True:
        e_norm = frob_norm(e)
        if e_norm <= threshold:
            stop_reason = StopReason.TOLERANCE_MET
            break
        if len(nodes) >= cfg.l_max:
            stop_reason = StopReason.NODE_BUDGET_EXHAUSTED
            break

        L = len(nodes) + 1
        residual_sq_before = np.einsum("ij,ij->j", e, e)

        if algorithm == Algorithm.IRVFL:
            node, h, tried = _draw_irvfl_node(X, cfg, L, rng)
            if node is None:
                stop_reason = StopReason.STALLED
                break
            r_used = mu_used = None
            projection_sq = np.square(e.T @ h) / float(h @ h)
            xi = ()
        else:
            outcome = find_best_node(e, X, cfg, L, cfg.r0, rng)
            if isinstance(outcome, Stalled):
                stop_reason = StopReason.STALLED
                break
            node, h = outcome.node, outcome.h
            r_used, mu_used = outcome.r, outcome.mu
            tried = outcome.candidates_tried
            projection_sq = outcome.projection_sq
            xi = tuple(float(v) for v in outcome.xi_per_output)

        nodes.append(node)
        h_columns.append(h)
        if test is not None:
            test_columns.append(node_activation_vector(node, test.X))

        if algorithm in (Algorithm.SC1, Algorithm.IRVFL):
            beta = eval_constructive(e, h)
            B = np.vstack([B, beta.reshape(1, m)])
            e = e - np.outer(h, beta)
        else:
            H = np.column_stack(h_columns)
            if algorithm == Algorithm.SC2:
                n_fixed = max(L - cfg.window, 0)
                B = eval_window(H, T, B[:n_fixed], cfg.window, tol)
            else:
                B = eval_global(H, T, tol)
            e = residual(H, B, T)

        new_norm = frob_norm(e)
        trace.records.append(TraceRecord(
            L=L,
            train_residual_frob=new_norm,
            train_rmse=new_norm / math.sqrt(n),
            test_rmse=test_rmse(),
            r_at_acceptance=r_used,
            mu_at_acceptance=mu_used,
            lambda_used=node.lambda_used,
            candidates_tried=tried,
            elapsed=time.perf_counter() - start,
            residual_frob_before=e_norm,
            residual_sq_before=tuple(float(v) for v in residual_sq_before),
            projection_sq=tuple(float(v) for v in projection_sq),
            xi_per_output=xi,
        ))
        logging.debug(f"Node {L}: lambda={node.lambda_used:g}, residual {e_norm:.6g} -> "
                      f"{new_norm:.6g}, {tried} candidate(s)")

    trace.total_elapsed = time.perf_counter() - start

    model = ScnModel(
        input_dim=d,
        output_dim=m,
        nodes=tuple(nodes),
        output_weights=B,
        norm_meta=dataset.norm_meta,
        activation=cfg.activation,
        training_summary={
            "algorithm": algorithm.value,
            "seed": cfg.seed,
            "final_train_rmse": trace.final_train_rmse,
            "stop_reason": stop_reason.value,
        },
    )

    logging.info(f"✅ {algorithm.label} finished: L={len(nodes)}, "
                 f"train RMSE={trace.final_train_rmse:.6f}, stop={stop_reason.value}, "
                 f"{trace.total_elapsed:.2f}s")
    return TrainingRun(model, trace, stop_reason)


def _mean_std(values: List[float]) -> Tuple[float, float]:
    if not values:
        return float("nan"), float("nan")
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def format_mean_std(mean: float, std: float, digits: int = 4) -> str:
    """Render a value as mean±std."""
    if mean is None or math.isnan(mean):
        return "-"
    return f"{mean:.{digits}f}±{std:.{digits}f}"


@dataclass
class TrialSummary:
    """Mean and standard deviation of repeated runs (population std, 0 for one trial)."""

    algorithm: Algorithm
    n_trials: int
    train_rmse_mean: float
    train_rmse_std: float
    test_rmse_mean: Optional[float]
    test_rmse_std: Optional[float]
    nodes_mean: float
    nodes_std: float
    time_mean: float
    time_std: float
    stop_reasons: Dict[str, int]
    runs: List[TrainingRun] = field(default_factory=list, repr=False)

    @classmethod
    def from_runs(cls, algorithm: Algorithm, runs: List[TrainingRun]) -> "TrialSummary":
        train_vals = [run.trace.final_train_rmse for run in runs]
        test_vals = [run.trace.final_test_rmse for run in runs
                     if run.trace.final_test_rmse is not None]
        train_mean, train_std = _mean_std(train_vals)
        test_mean, test_std = _mean_std(test_vals) if test_vals else (None, None)
        nodes_mean, nodes_std = _mean_std([float(run.model.n_nodes) for run in runs])
        time_mean, time_std = _mean_std([run.trace.total_elapsed for run in runs])
        reasons: Dict[str, int] = {}
        for run in runs:
            reasons[run.stop_reason.value] = reasons.get(run.stop_reason.value, 0) + 1
        return cls(
            algorithm=algorithm,
            n_trials=len(runs),
            train_rmse_mean=train_mean,
            train_rmse_std=train_std,
            test_rmse_mean=test_mean,
            test_rmse_std=test_std,
            nodes_mean=nodes_mean,
            nodes_std=nodes_std,
            time_mean=time_mean,
            time_std=time_std,
            stop_reasons=reasons,
            runs=runs,
        )

    def mean_curve(self, attribute: str = "train_rmse") -> np.ndarray:
        """
        Average of a per-node trace attribute over trials, indexed by L = 1..max L.

        Runs that stopped early contribute their last value for larger L.
        """
        curves = [[getattr(rec, attribute) for rec in run.trace.records] for run in self.runs]
        curves = [c for c in curves if c and c[0] is not None]
        if not curves:
            return np.zeros(0)
        length = max(len(c) for c in curves)
        padded = np.array([c + [c[-1]] * (length - len(c)) for c in curves], dtype=np.float64)
        return padded.mean(axis=0)


def run_trials(dataset: Dataset, cfg: ScnConfig, n_trials: int,
               test: Optional[Dataset] = None, jobs: int = 1,
               show_progress: bool = True, description: Optional[str] = None) -> TrialSummary:
    """
    Repeat ``train`` with independent derived seeds and summarise the results.

    Trial t uses the seed derived from (cfg.seed, t), so results do not depend
    on ``jobs`` or on completion order.

    Args:
        dataset: Normalized training data
        cfg: Construction hyperparameters
        n_trials: Number of independent trials (>= 1)
        test: Optional normalized held-out data
        jobs: Number of worker threads (1 = sequential)
        show_progress: Show a progress bar
        description: Progress bar label

    Returns:
        TrialSummary over all trials
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be at least 1, got {n_trials}")

    root = RngStream(cfg.seed)
    configs = [cfg.replace(seed=root.trial_seed(t)) for t in range(n_trials)]
    runs: List[Optional[TrainingRun]] = [None] * n_trials
    label = description or f"{cfg.algorithm.label} trials"

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(complete_style="green", finished_style="bold green"),
        MofNCompleteColumn(),
        TextColumn("•"),
        TimeElapsedColumn(),
        TextColumn("•"),
        TimeRemainingColumn(),
        disable=not show_progress,
    ) as progress:
        task = progress.add_task(f"[cyan]{label}", total=n_trials)

        if jobs <= 1:
            for t, trial_cfg in enumerate(configs):
                runs[t] = train(dataset, trial_cfg, test)
                progress.update(task, advance=1)
        else:
            with ThreadPoolExecutor(max_workers=jobs) as executor:
                futures = {executor.submit(train, dataset, trial_cfg, test): t
                           for t, trial_cfg in enumerate(configs)}
                for future in as_completed(futures):
                    t = futures[future]
                    runs[t] = future.result()
                    progress.update(task, advance=1)

    summary = TrialSummary.from_runs(cfg.algorithm, [run for run in runs if run is not None])
    logging.info(f"📊 {label}: train RMSE {format_mean_std(summary.train_rmse_mean, summary.train_rmse_std)}, "
                 f"nodes {summary.nodes_mean:.2f}")
    return summary
