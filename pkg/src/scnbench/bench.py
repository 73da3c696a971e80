"""
Bench - Benchmark suite for SCN construction algorithms

Runs the repeated-trial experiments on a function-approximation task:
accuracy comparison at fixed node budgets, efficiency at a fixed error
tolerance, the SC-II window-size sweep, the IRVFL scope sweep, and mean error
curves. Results are summarised as mean±std tables.
"""

import copy
import json
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml

from .configurator import Algorithm, ScnConfig
from .data import (
    Dataset,
    SplitSpec,
    apply_normalization,
    gen_db1,
    gen_linear_sigmoid,
    load_csv,
    normalize_minmax,
    split,
)
from .report_generator import ReportGenerator
from .trainer import TrialSummary, format_mean_std, run_trials


DEFAULT_SUITE: Dict[str, Any] = {
    "name": "db1",
    "trials": 20,
    "seed": 0,
    "dataset": {"kind": "db1", "n_train": 1000, "n_test": 300, "seed": 0},
    "config": {"t_max": 200, "r0": 0.9},
    "comparison": {
        "algorithms": ["irvfl", "sc1", "sc2", "sc3"],
        "node_budgets": [25, 50],
        "window": 15,
    },
    "efficiency": {
        "algorithms": ["irvfl", "sc1", "sc2", "sc3"],
        "epsilon": 0.05,
        "l_max": 100,
        "window": 15,
    },
    "window_sweep": {
        "windows": [5, 10, 15, 20, 25, 30, 35],
        "l_max": 35,
        "epsilon": 0.05,
        "efficiency_l_max": 100,
    },
    "irvfl_sweep": {"lambdas": [1, 100, 200], "l_max": 100},
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _stats(values: List[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def _value_at(summary: TrialSummary, L: int, attribute: str) -> List[float]:
    """Trace attribute at node count L for every trial (last value if a run stopped earlier)."""
    values = []
    for run in summary.runs:
        records = run.trace.records
        if not records:
            initial = {"train_rmse": run.trace.initial_train_rmse,
                       "test_rmse": run.trace.initial_test_rmse}
            values.append(initial[attribute])
            continue
        values.append(getattr(records[min(L, len(records)) - 1], attribute))
    return [v for v in values if v is not None]


class Bench:
    """
    Repeated-trial benchmark runner.

    Suites are YAML/JSON documents merged over DEFAULT_SUITE; any section can be
    disabled by setting it to null.
    """

    def __init__(self, suite_file: Optional[str] = None, trials: Optional[int] = None,
                 jobs: int = 1, show_progress: bool = True):
        """
        Initialize the benchmark suite.

        Args:
            suite_file: Optional path to a suite file (.yaml/.yml or .json)
            trials: Override of the suite trial count
            jobs: Worker threads per trial batch
            show_progress: Show progress bars
        """
        self.suite = self._load_suite(suite_file)
        if trials is not None:
            self.suite["trials"] = trials
        if int(self.suite["trials"]) < 1:
            raise ValueError("trials must be at least 1")
        self.jobs = jobs
        self.show_progress = show_progress
        self.base_config = ScnConfig.from_dict(
            {"seed": self.suite.get("seed", 0), **self.suite.get("config", {})}
        )
        self.train_data, self.test_data = self._load_data(self.suite["dataset"])
        self.tables: Dict[str, List[Dict[str, Any]]] = {}
        self.curves: Dict[str, np.ndarray] = {}
        self.summaries: Dict[str, Dict[str, Any]] = {}

    @staticmethod
    def _load_suite(suite_file: Optional[str]) -> Dict[str, Any]:
        """Load suite from file or use defaults."""
        if not suite_file or suite_file == DEFAULT_SUITE["name"]:
            return copy.deepcopy(DEFAULT_SUITE)
        if not os.path.exists(suite_file):
            raise FileNotFoundError(f"Suite file not found: {suite_file}")
        with open(suite_file, "r") as f:
            if suite_file.endswith((".yaml", ".yml")):
                user_suite = yaml.safe_load(f) or {}
            else:
                user_suite = json.load(f)
        return _merge(DEFAULT_SUITE, user_suite)

    @staticmethod
    def _load_data(spec: Dict[str, Any]) -> Tuple[Dataset, Dataset]:
        """Build the normalized train/test pair described by the suite."""
        kind = spec.get("kind", "db1")
        if kind == "db1":
            train, test = gen_db1(spec.get("n_train", 1000), spec.get("n_test", 300),
                                  spec.get("seed", 0))
        elif kind == "linear-sigmoid":
            full = gen_linear_sigmoid(spec.get("n", 1000), spec.get("input_dim", 9),
                                      spec.get("seed", 0))
            train, test = split(full, SplitSpec(spec.get("train_fraction", 0.75),
                                                spec.get("seed", 0)))
        elif kind == "csv":
            targets = spec.get("target_columns", 1)
            train = load_csv(spec["train"], targets)
            if spec.get("test"):
                test = load_csv(spec["test"], targets)
            else:
                train, test = split(train, SplitSpec(spec.get("train_fraction", 0.75),
                                                     spec.get("seed", 0)))
        else:
            raise ValueError(f"Unknown dataset kind: {kind}")
        train = normalize_minmax(train)
        return train, apply_normalization(test, train.norm_meta)

    def _trials(self, cfg: ScnConfig, description: str) -> TrialSummary:
        return run_trials(self.train_data, cfg, int(self.suite["trials"]),
                          test=self.test_data, jobs=self.jobs,
                          show_progress=self.show_progress, description=description)

    def run_comparison(self) -> List[Dict[str, Any]]:
        """Mean±std train/test RMSE of each algorithm at fixed node budgets."""
        section = self.suite.get("comparison")
        if not section:
            return []
        budgets = sorted(int(b) for b in section["node_budgets"])
        rows = []
        for name in section["algorithms"]:
            algorithm = Algorithm.parse(name)
            cfg = self.base_config.replace(
                algorithm=algorithm, l_max=budgets[-1], epsilon=0.0,
                window=section.get("window") if algorithm == Algorithm.SC2 else None,
            )
            summary = self._trials(cfg, f"{algorithm.label} (L={budgets[-1]})")
            self.curves[f"{algorithm.label}_train_rmse"] = summary.mean_curve("train_rmse")
            self.curves[f"{algorithm.label}_test_rmse"] = summary.mean_curve("test_rmse")
            for L in budgets:
                train_mean, train_std = _stats(_value_at(summary, L, "train_rmse"))
                test_mean, test_std = _stats(_value_at(summary, L, "test_rmse"))
                rows.append({
                    "algorithm": algorithm.label,
                    "L": L,
                    "train_rmse": format_mean_std(train_mean, train_std),
                    "test_rmse": format_mean_std(test_mean, test_std),
                    "train_rmse_mean": train_mean,
                    "test_rmse_mean": test_mean,
                })
        self.tables["comparison"] = rows
        return rows

    def run_efficiency(self) -> List[Dict[str, Any]]:
        """Nodes and time needed to reach the error tolerance."""
        section = self.suite.get("efficiency")
        if not section:
            return []
        rows = []
        for name in section["algorithms"]:
            algorithm = Algorithm.parse(name)
            cfg = self.base_config.replace(
                algorithm=algorithm, l_max=int(section["l_max"]),
                epsilon=float(section["epsilon"]),
                window=section.get("window") if algorithm == Algorithm.SC2 else None,
            )
            summary = self._trials(cfg, f"{algorithm.label} (eps={cfg.epsilon:g})")
            rows.append(self._efficiency_row(algorithm.label, summary))
        self.tables["efficiency"] = rows
        return rows

    @staticmethod
    def _efficiency_row(label: str, summary: TrialSummary) -> Dict[str, Any]:
        reached = summary.stop_reasons.get("tolerance-met", 0)
        return {
            "algorithm": label,
            "nodes": format_mean_std(summary.nodes_mean, summary.nodes_std, 2),
            "time_s": format_mean_std(summary.time_mean, summary.time_std),
            "reached": f"{reached}/{summary.n_trials}",
            "nodes_mean": summary.nodes_mean,
            "nodes_max": max(run.model.n_nodes for run in summary.runs),
        }

    def run_window_sweep(self) -> List[Dict[str, Any]]:
        """SC-II at a fixed node budget for a range of window sizes, plus efficiency."""
        section = self.suite.get("window_sweep")
        if not section:
            return []
        rows = []
        for K in sorted(int(k) for k in section["windows"]):
            cfg = self.base_config.replace(algorithm=Algorithm.SC2, window=K,
                                           l_max=int(section["l_max"]), epsilon=0.0)
            fixed = self._trials(cfg, f"SC-II K={K} (L={cfg.l_max})")
            eff_cfg = cfg.replace(l_max=int(section["efficiency_l_max"]),
                                  epsilon=float(section["epsilon"]))
            efficiency = self._trials(eff_cfg, f"SC-II K={K} (eps={eff_cfg.epsilon:g})")
            rows.append({
                "K": K,
                "train_rmse": format_mean_std(fixed.train_rmse_mean, fixed.train_rmse_std),
                "test_rmse": format_mean_std(fixed.test_rmse_mean, fixed.test_rmse_std),
                "nodes": format_mean_std(efficiency.nodes_mean, efficiency.nodes_std, 2),
                "time_s": format_mean_std(efficiency.time_mean, efficiency.time_std),
                "train_rmse_mean": fixed.train_rmse_mean,
                "test_rmse_mean": fixed.test_rmse_mean,
            })
        self.tables["window_sweep"] = rows
        return rows

    def run_irvfl_sweep(self) -> List[Dict[str, Any]]:
        """IRVFL final accuracy for several fixed scopes."""
        section = self.suite.get("irvfl_sweep")
        if not section:
            return []
        rows = []
        for lam in section["lambdas"]:
            cfg = self.base_config.replace(algorithm=Algorithm.IRVFL, upsilon=(float(lam),),
                                           l_max=int(section["l_max"]), epsilon=0.0)
            summary = self._trials(cfg, f"IRVFL lambda={lam:g}")
            rows.append({
                "lambda": float(lam),
                "L": cfg.l_max,
                "train_rmse": format_mean_std(summary.train_rmse_mean, summary.train_rmse_std),
                "test_rmse": format_mean_std(summary.test_rmse_mean, summary.test_rmse_std),
                "train_rmse_mean": summary.train_rmse_mean,
            })
        self.tables["irvfl_sweep"] = rows
        return rows

    def run(self) -> Dict[str, List[Dict[str, Any]]]:
        """Run every enabled section of the suite."""
        logging.info(f"🚀 Running bench suite '{self.suite.get('name')}' "
                     f"with {self.suite['trials']} trial(s)")
        self.run_comparison()
        self.run_efficiency()
        self.run_window_sweep()
        self.run_irvfl_sweep()
        return self.tables

    def save_results(self, output_dir: str = "output/bench") -> Dict[str, str]:
        """
        Save tables, curves and a summary document.

        Args:
            output_dir: Target directory

        Returns:
            Mapping of artifact name to written path
        """
        os.makedirs(output_dir, exist_ok=True)
        written: Dict[str, str] = {}
        for name, rows in self.tables.items():
            path = ReportGenerator.write_table_csv(rows, os.path.join(output_dir, f"{name}.csv"))
            if path:
                written[name] = path
        curves_path = ReportGenerator.write_curves_csv(
            self.curves, os.path.join(output_dir, "curves.csv"))
        if curves_path:
            written["curves"] = curves_path
        written["json"] = ReportGenerator.write_json(
            {"suite": self.suite, "tables": self.tables},
            os.path.join(output_dir, "bench_results.json"))
        written["markdown"] = ReportGenerator.write_markdown(
            self.display_tables(), os.path.join(output_dir, "bench_summary.md"),
            title=f"SCN benchmark: {self.suite.get('name')}",
            notes=[f"trials per cell: {self.suite['trials']}",
                   f"training samples: {self.train_data.n_samples}, "
                   f"test samples: {self.test_data.n_samples}"])
        print(f"Results saved to: {output_dir}")
        return written

    def display_tables(self) -> Dict[str, List[Dict[str, Any]]]:
        """Tables without the raw numeric helper columns."""
        return {
            name: [{k: v for k, v in row.items() if not k.endswith(("_mean", "_max"))}
                   for row in rows]
            for name, rows in self.tables.items()
        }
