"""
Tests for the scnbench command line

Commands are driven through main(argv) so exit codes and printed output can
be checked without spawning processes; one subprocess smoke test covers the
module entry point.
"""

import os
import subprocess
import sys

import pytest

from scnbench.cli import main
from scnbench.data import load_csv
from scnbench.persistence import load_model, read_report


def run_cli(argv):
    """Run main(argv) and return the exit code (0 when main returns normally)."""
    try:
        main(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    return 0


@pytest.fixture
def db1_files(tmp_path):
    out = tmp_path / "db1"
    assert run_cli(["gen-data", "--out", str(out), "--n-train", "120",
                    "--n-test", "30", "--seed", "4"]) == 0
    return str(out / "train.csv"), str(out / "test.csv")


def train_args(train_csv, tmp_path, name="m", *extra):
    return ["train", "--train", train_csv, "--l-max", "6", "--t-max", "10",
            "--epsilon", "0", "--seed", "3",
            "--model-out", str(tmp_path / f"{name}.json"),
            "--report-out", str(tmp_path / f"{name}.csv"), *extra]


class TestGenData:
    """gen-data command"""

    def test_defaults(self, tmp_path):
        assert run_cli(["gen-data", "--out", str(tmp_path)]) == 0
        assert load_csv(str(tmp_path / "train.csv")).n_samples == 1000
        assert load_csv(str(tmp_path / "test.csv")).n_samples == 300

    def test_row_count(self, tmp_path):
        assert run_cli(["gen-data", "--out", str(tmp_path), "--n-train", "10"]) == 0
        assert load_csv(str(tmp_path / "train.csv")).n_samples == 10

    def test_same_seed_same_files(self, tmp_path):
        run_cli(["gen-data", "--out", str(tmp_path / "a"), "--n-train", "20", "--seed", "1"])
        run_cli(["gen-data", "--out", str(tmp_path / "b"), "--n-train", "20", "--seed", "1"])
        assert (tmp_path / "a" / "train.csv").read_bytes() == (tmp_path / "b" / "train.csv").read_bytes()

    def test_linear_sigmoid(self, tmp_path):
        assert run_cli(["gen-data", "--out", str(tmp_path), "--dataset", "linear-sigmoid",
                        "--n-train", "40", "--n-test", "10"]) == 0
        ds = load_csv(str(tmp_path / "train.csv"))
        assert ds.input_dim == 9
        assert ds.n_samples == 40


class TestTrain:
    """train command"""

    def test_writes_model_and_report(self, db1_files, tmp_path, capsys):
        train_csv, test_csv = db1_files
        code = run_cli(train_args(train_csv, tmp_path, "m", "--test", test_csv,
                                  "--algorithm", "sc3"))
        assert code == 0
        out = capsys.readouterr().out
        assert "Train RMSE" in out
        assert "Test RMSE" in out
        assert "Stop reason: node-budget-exhausted" in out
        model = load_model(str(tmp_path / "m.json"))
        assert model.n_nodes == 6
        assert len(read_report(str(tmp_path / "m.csv"))) == 6

    def test_identical_flags_identical_bytes(self, db1_files, tmp_path):
        train_csv, _ = db1_files
        run_cli(train_args(train_csv, tmp_path, "a", "--algorithm", "sc2", "--window", "3"))
        run_cli(train_args(train_csv, tmp_path, "b", "--algorithm", "sc2", "--window", "3"))
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_sc2_requires_window(self, db1_files, tmp_path):
        train_csv, _ = db1_files
        assert run_cli(train_args(train_csv, tmp_path, "m", "--algorithm", "sc2")) == 2

    def test_stalled_exit_code(self, db1_files, tmp_path, capsys):
        train_csv, _ = db1_files
        code = run_cli(train_args(train_csv, tmp_path, "m", "--algorithm", "sc3",
                                  "--upsilon", "1e-9", "--t-max", "1",
                                  "--max-r-rounds", "1"))
        assert code == 3
        assert "stalled" in capsys.readouterr().out
        assert os.path.exists(tmp_path / "m.json")

    def test_config_file_with_flag_override(self, db1_files, tmp_path):
        train_csv, _ = db1_files
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("algorithm: sc2\nwindow: 2\nl_max: 20\n")
        code = run_cli(train_args(train_csv, tmp_path, "m", "--config", str(cfg)))
        assert code == 0
        model = load_model(str(tmp_path / "m.json"))
        assert model.training_summary["algorithm"] == "sc2"
        assert model.n_nodes == 6

    def test_invalid_config_value(self, db1_files, tmp_path, capsys):
        train_csv, _ = db1_files
        assert run_cli(train_args(train_csv, tmp_path, "m", "--r0", "1.5")) == 1
        assert "❌" in capsys.readouterr().out

    def test_missing_data_file(self, tmp_path):
        assert run_cli(train_args(str(tmp_path / "none.csv"), tmp_path)) == 1


class TestEval:
    """eval command"""

    def test_eval_on_training_file_matches_summary(self, db1_files, tmp_path, capsys):
        train_csv, _ = db1_files
        run_cli(train_args(train_csv, tmp_path, "m", "--algorithm", "sc3"))
        capsys.readouterr()
        assert run_cli(["eval", "--model", str(tmp_path / "m.json"), "--data", train_csv]) == 0
        out = capsys.readouterr().out
        summary = load_model(str(tmp_path / "m.json")).training_summary
        assert f"RMSE: {summary['final_train_rmse']:.6f}" in out

    def test_predictions_out(self, db1_files, tmp_path):
        train_csv, test_csv = db1_files
        run_cli(train_args(train_csv, tmp_path, "m"))
        pred_path = tmp_path / "pred.csv"
        assert run_cli(["eval", "--model", str(tmp_path / "m.json"), "--data", test_csv,
                        "--predictions-out", str(pred_path)]) == 0
        assert load_csv(str(pred_path)).n_samples == 30

    def test_dimension_mismatch(self, db1_files, tmp_path):
        train_csv, _ = db1_files
        run_cli(train_args(train_csv, tmp_path, "m"))
        other = tmp_path / "wide.csv"
        other.write_text("1,2,3\n4,5,6\n")
        assert run_cli(["eval", "--model", str(tmp_path / "m.json"), "--data", str(other)]) == 1


class TestBenchCommand:
    """bench command"""

    def test_small_suite(self, tmp_path, capsys):
        suite = tmp_path / "suite.yaml"
        suite.write_text(
            "name: tiny\n"
            "dataset: {kind: db1, n_train: 60, n_test: 20}\n"
            "config: {t_max: 5}\n"
            "comparison: {algorithms: [irvfl, sc3], node_budgets: [2, 4]}\n"
            "efficiency: null\n"
            "window_sweep: null\n"
            "irvfl_sweep: null\n"
        )
        out_dir = tmp_path / "bench"
        code = run_cli(["bench", "--suite", str(suite), "--trials", "1",
                        "--out", str(out_dir), "--no-progress"])
        assert code == 0
        assert (out_dir / "comparison.csv").exists()
        assert (out_dir / "bench_summary.md").exists()
        assert "Bench suite completed" in capsys.readouterr().out

    def test_zero_trials_is_usage_error(self):
        assert run_cli(["bench", "--trials", "0"]) == 2

    def test_missing_suite_file(self, tmp_path):
        assert run_cli(["bench", "--suite", str(tmp_path / "none.yaml")]) == 1


class TestEntryPoint:
    """Top-level options"""

    def test_version(self, capsys):
        assert run_cli(["--version"]) == 0
        assert "SCN Bench" in capsys.readouterr().out

    def test_no_command_prints_help(self, capsys):
        assert run_cli([]) == 1
        assert "usage" in capsys.readouterr().out

    @pytest.mark.integration
    def test_module_help(self):
        result = subprocess.run(
            [sys.executable, "-m", "scnbench.cli", "--help"],
            capture_output=True,
            text=True,
            cwd=os.path.join(os.path.dirname(__file__), "..", "src"),
        )
        assert result.returncode == 0
        assert "gen-data" in result.stdout
        assert "bench" in result.stdout
