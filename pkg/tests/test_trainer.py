"""
Tests for the construction loops and repeated trials

Small DB1 instances keep these fast; the full-size acceptance runs live in
test_bench.py behind the slow marker.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from scnbench.configurator import Algorithm, ScnConfig
from scnbench.data import Dataset, NormMeta, apply_normalization, gen_db1, normalize_minmax
from scnbench.persistence import dumps_model
from scnbench.trainer import (
    StopReason,
    TrialSummary,
    format_mean_std,
    run_trials,
    train,
)


ALL_ALGORITHMS = ["irvfl", "sc1", "sc2", "sc3"]


@pytest.fixture(scope="module")
def db1_small():
    raw_train, raw_test = gen_db1(n_train=200, n_test=50, seed=1)
    train_ds = normalize_minmax(raw_train)
    return train_ds, apply_normalization(raw_test, train_ds.norm_meta)


def small_config(algorithm: str, **changes) -> ScnConfig:
    params = dict(algorithm=algorithm, l_max=12, epsilon=0.0, t_max=20, seed=7)
    if algorithm == "sc2":
        params["window"] = 4
    params.update(changes)
    return ScnConfig(**params)


class TestTrain:
    """Single construction runs"""

    def test_zero_target_needs_no_nodes(self):
        X = np.linspace(0.0, 1.0, 10).reshape(-1, 1)
        ds = Dataset(X, np.zeros((10, 1)), norm_meta=NormMeta.identity(1, 1))
        model, trace, stop = train(ds, ScnConfig(epsilon=0.05))
        assert stop is StopReason.TOLERANCE_MET
        assert model.n_nodes == 0
        assert len(trace) == 0

    def test_requires_normalized_data(self):
        raw_train, _ = gen_db1(n_train=20, n_test=5)
        with pytest.raises(ValueError):
            train(raw_train, ScnConfig())

    @pytest.mark.parametrize("algorithm", ALL_ALGORITHMS)
    def test_budget_exhausted_with_zero_tolerance(self, db1_small, algorithm):
        train_ds, test_ds = db1_small
        model, trace, stop = train(train_ds, small_config(algorithm), test_ds)
        assert stop is StopReason.NODE_BUDGET_EXHAUSTED
        assert model.n_nodes == 12
        assert len(trace) == 12
        assert model.output_weights.shape == (12, 1)
        assert [rec.L for rec in trace] == list(range(1, 13))

    @pytest.mark.parametrize("algorithm", ALL_ALGORITHMS)
    def test_training_residual_is_non_increasing(self, db1_small, algorithm):
        train_ds, _ = db1_small
        _, trace, _ = train(train_ds, small_config(algorithm))
        norms = trace.residual_norms()
        assert np.all(np.diff(norms) <= 1e-9 * norms[0])

    @pytest.mark.parametrize("algorithm", ["sc1", "sc2", "sc3"])
    def test_accepted_nodes_satisfy_inequality(self, db1_small, algorithm):
        train_ds, _ = db1_small
        _, trace, _ = train(train_ds, small_config(algorithm))
        for rec in trace:
            ee = np.array(rec.residual_sq_before)
            proj = np.array(rec.projection_sq)
            xi = proj - (1.0 - rec.r_at_acceptance - rec.mu_at_acceptance) * ee
            assert xi.min() >= -1e-12
            assert_allclose(xi, rec.xi_per_output, rtol=1e-12, atol=1e-15)

    def test_sc1_contraction_per_step(self, db1_small):
        train_ds, _ = db1_small
        _, trace, _ = train(train_ds, small_config("sc1"))
        for rec in trace:
            bound = (rec.r_at_acceptance + rec.mu_at_acceptance) * rec.residual_frob_before ** 2
            assert rec.train_residual_frob ** 2 <= bound + 1e-10

    def test_irvfl_records_no_supervision(self, db1_small):
        train_ds, _ = db1_small
        model, trace, _ = train(train_ds, small_config("irvfl", upsilon=(1.0,)))
        assert all(rec.r_at_acceptance is None for rec in trace)
        assert all(rec.candidates_tried == 1 for rec in trace)
        assert all(node.lambda_used == 1.0 for node in model.nodes)

    @pytest.mark.parametrize("activation", ["tanh", "gaussian", "sine", "cosine"])
    @pytest.mark.parametrize("algorithm", ALL_ALGORITHMS)
    def test_other_activations(self, db1_small, algorithm, activation):
        train_ds, _ = db1_small
        model, trace, stop = train(train_ds, small_config(algorithm, activation=activation))
        assert stop is StopReason.NODE_BUDGET_EXHAUSTED
        assert model.n_nodes == 12
        assert all(node.activation.value == activation for node in model.nodes)
        norms = trace.residual_norms()
        assert np.all(np.diff(norms) <= 1e-9 * norms[0])

    def test_irvfl_redraws_zero_activation_columns(self, db1_small):
        # Narrow gaussians at a wide scope often vanish on every sample
        train_ds, _ = db1_small
        cfg = small_config("irvfl", activation="gaussian", upsilon=(200.0,), l_max=30, t_max=200)
        model, trace, stop = train(train_ds, cfg)
        assert stop is StopReason.NODE_BUDGET_EXHAUSTED
        assert model.n_nodes == 30
        H = model.hidden_matrix(train_ds.X)
        assert np.all(np.einsum("ij,ij->j", H, H) > 0.0)
        assert any(rec.candidates_tried > 1 for rec in trace)

    def test_irvfl_stalls_when_every_draw_vanishes(self, db1_small):
        train_ds, _ = db1_small
        cfg = small_config("irvfl", activation="gaussian", upsilon=(1e9,), t_max=3)
        model, trace, stop = train(train_ds, cfg)
        assert stop is StopReason.STALLED
        assert model.n_nodes == 0

    def test_sc2_with_large_window_equals_sc3(self, db1_small):
        train_ds, _ = db1_small
        sc2 = train(train_ds, small_config("sc2", window=12))
        sc3 = train(train_ds, small_config("sc3"))
        assert_array_equal(sc2.model.output_weights, sc3.model.output_weights)
        for a, b in zip(sc2.model.nodes, sc3.model.nodes):
            assert_array_equal(a.w, b.w)
            assert a.b == b.b
        assert_array_equal(sc2.trace.residual_norms(), sc3.trace.residual_norms())

    def test_sc3_fits_better_than_sc1(self, db1_small):
        train_ds, _ = db1_small
        sc1 = train(train_ds, small_config("sc1"))
        sc3 = train(train_ds, small_config("sc3"))
        assert sc3.trace.final_train_rmse < sc1.trace.final_train_rmse

    def test_identical_configs_give_identical_model_files(self, db1_small):
        train_ds, _ = db1_small
        cfg = small_config("sc2")
        assert dumps_model(train(train_ds, cfg).model) == dumps_model(train(train_ds, cfg).model)

    def test_trace_matches_model_predictions(self, db1_small):
        train_ds, test_ds = db1_small
        model, trace, _ = train(train_ds, small_config("sc3"), test_ds)
        X_raw = train_ds.norm_meta.denormalize_x(train_ds.X)
        pred = model.predict_normalized(X_raw)
        train_rmse = np.sqrt(np.sum((pred - train_ds.T) ** 2) / train_ds.n_samples)
        assert train_rmse == pytest.approx(trace.final_train_rmse, rel=1e-9)
        assert trace.final_test_rmse is not None
        assert model.training_summary["stop_reason"] == "node-budget-exhausted"

    def test_tolerance_metric(self, db1_small):
        train_ds, _ = db1_small
        by_rmse = train(train_ds, small_config("sc3", epsilon=1.0))
        assert by_rmse.stop_reason is StopReason.TOLERANCE_MET
        assert by_rmse.model.n_nodes == 0
        by_frob = train(train_ds, small_config("sc3", epsilon=1.0, tolerance_metric="frobenius"))
        assert by_frob.model.n_nodes > 0

    def test_reaches_tolerance(self, db1_small):
        train_ds, _ = db1_small
        run = train(train_ds, small_config("sc3", epsilon=0.1, l_max=50))
        assert run.stop_reason is StopReason.TOLERANCE_MET
        assert run.trace.final_train_rmse <= 0.1

    def test_stalls_with_tiny_scope(self, db1_small):
        train_ds, _ = db1_small
        cfg = small_config("sc3", upsilon=(1e-9,), t_max=1, max_r_rounds_per_lambda=1)
        model, _, stop = train(train_ds, cfg)
        assert stop is StopReason.STALLED
        assert model.n_nodes < cfg.l_max


class TestTrials:
    """Repeated runs and summaries"""

    def test_single_trial_has_zero_std(self, db1_small):
        train_ds, test_ds = db1_small
        summary = run_trials(train_ds, small_config("sc1"), 1, test=test_ds,
                             show_progress=False)
        assert summary.n_trials == 1
        assert summary.train_rmse_std == 0.0
        assert summary.test_rmse_std == 0.0
        assert summary.nodes_std == 0.0
        assert summary.train_rmse_mean == summary.runs[0].trace.final_train_rmse

    def test_parallel_matches_sequential(self, db1_small):
        train_ds, _ = db1_small
        cfg = small_config("sc3", l_max=5)
        seq = run_trials(train_ds, cfg, 3, jobs=1, show_progress=False)
        par = run_trials(train_ds, cfg, 3, jobs=3, show_progress=False)
        for a, b in zip(seq.runs, par.runs):
            assert dumps_model(a.model) == dumps_model(b.model)

    def test_trials_use_distinct_seeds(self, db1_small):
        train_ds, _ = db1_small
        summary = run_trials(train_ds, small_config("irvfl", l_max=5), 3, show_progress=False)
        seeds = {run.model.training_summary["seed"] for run in summary.runs}
        assert len(seeds) == 3

    def test_rejects_zero_trials(self, db1_small):
        train_ds, _ = db1_small
        with pytest.raises(ValueError):
            run_trials(train_ds, small_config("sc1"), 0, show_progress=False)

    def test_mean_curve_carries_last_value(self, db1_small):
        train_ds, _ = db1_small
        short = train(train_ds, small_config("sc3", l_max=2))
        long = train(train_ds, small_config("sc3", l_max=4, seed=8))
        summary = TrialSummary.from_runs(Algorithm.SC3, [short, long])
        curve = summary.mean_curve("train_rmse")
        assert curve.shape == (4,)
        expected_last = (short.trace.records[-1].train_rmse + long.trace.records[-1].train_rmse) / 2
        assert curve[-1] == pytest.approx(expected_last)

    def test_format_mean_std(self):
        assert format_mean_std(0.0097, 0.0036) == "0.0097±0.0036"
        assert format_mean_std(26.67, 8.75, 2) == "26.67±8.75"
        assert format_mean_std(float("nan"), 0.0) == "-"
