"""Replay harness: baselines, selective runs, errors, sweeps, regressions.

The regression block freezes values computed on the committed reference
trace; any change to the estimator, selection, or RNG discipline will move
them and should be reviewed, not silently absorbed.
"""

import numpy as np
import pytest

from chanprobe.cca import LoadMatrix, MeasurementTiming, TrafficModel, generate_matrix
from chanprobe.errors import ConfigError
from chanprobe.gpr import KernelParams
from chanprobe.harness import (
    estimation_error,
    make_config,
    per_channel_errors,
    realized_window_average,
    results_payload,
    round_records_csv,
    run_exhaustive,
    run_selective,
    summary_row,
    sweep,
)
from chanprobe.selection import bootstrap_length, bootstrap_schedule


def matrix_from(rows):
    plane = np.array(rows, dtype=float)
    return LoadMatrix(plane, plane)


class TestRunExhaustive:
    def test_constant_plane(self, timing):
        mx = matrix_from([[0.3] * 3] * 4)
        records, summary = run_exhaustive(mx, timing)
        assert summary.avg_selected_load == pytest.approx(0.3)
        assert summary.cost_ms == 300.0
        assert {r.chosen for r in records} == {1}
        assert summary.switches == 0

    def test_two_round_mean(self, timing):
        mx = matrix_from([[0.2, 0.9], [0.9, 0.4]])
        _, summary = run_exhaustive(mx, timing)
        assert summary.avg_selected_load == pytest.approx(0.3)
        assert summary.switches == 1  # round 0 keeps the initial perch on 1

    def test_cost_reproduction(self, timing):
        mx = matrix_from([[0.5] * 13] * 2)
        records, summary = run_exhaustive(mx, timing)
        assert summary.cost_ms == 1300.0
        assert records[-1].cumulative_cost_ms == 2 * 1300.0

    def test_records_have_no_estimation_errors(self, timing):
        mx = matrix_from([[0.2, 0.9]])
        records, _ = run_exhaustive(mx, timing)
        assert records[0].err_true is None and records[0].err_avg is None


class TestRunSelective:
    def test_rejects_bad_k(self, timing):
        mx = matrix_from([[0.5, 0.5]] * 30)
        for k in (0, 3):
            with pytest.raises(ConfigError, match="K must be"):
                run_selective(mx, timing, k=k, window=2, policy="weight_product")

    def test_rejects_bad_window(self, timing):
        mx = matrix_from([[0.5, 0.5]] * 30)
        with pytest.raises(ConfigError, match="window"):
            run_selective(mx, timing, k=1, window=0, policy="weight_product")

    def test_rejects_unknown_policy(self, timing):
        mx = matrix_from([[0.5, 0.5]] * 30)
        with pytest.raises(ConfigError, match="policy"):
            run_selective(mx, timing, k=1, window=2, policy="best")

    def test_rejects_run_that_never_leaves_bootstrap(self, timing):
        mx = matrix_from([[0.5, 0.5]] * 4)  # bootstrap needs 2*2/1 = 4 rounds
        with pytest.raises(ConfigError, match="bootstrap"):
            run_selective(mx, timing, k=1, window=2, policy="weight_product")
        # but including bootstrap rounds in the averages makes it legal
        _, s = run_selective(
            mx, timing, k=1, window=2, policy="weight_product", include_bootstrap=True
        )
        assert s.rounds == 4

    def test_bootstrap_phase_and_flags(self, timing):
        mx = generate_matrix(TrafficModel.default(13, seed=3), 12, timing)
        records, _ = run_selective(mx, timing, k=7, window=2, policy="weight_product")
        boot = bootstrap_length(13, 7, 2)
        assert boot == 4
        assert [r.bootstrap for r in records[:boot]] == [True] * boot
        assert not any(r.bootstrap for r in records[boot:])
        for r in records[:boot]:
            assert r.measured_set == bootstrap_schedule(13, 7, r.round)

    def test_chosen_channel_always_measured(self, timing):
        mx = generate_matrix(TrafficModel.default(13, seed=3), 30, timing)
        for policy in ("weight_product", "variance_only", "benchmark_mavg"):
            records, _ = run_selective(mx, timing, k=5, window=2, policy=policy)
            for r in records:
                assert r.chosen in r.measured_set
                assert len(r.measured_set) == 5

    def test_cumulative_cost(self, timing):
        mx = generate_matrix(TrafficModel.default(13, seed=3), 30, timing)
        records, summary = run_selective(mx, timing, k=7, window=2, policy="weight_product")
        assert summary.cost_ms == 700.0
        assert records[-1].cumulative_cost_ms == pytest.approx(30 * 700.0)
        assert records[0].cumulative_cost_ms == pytest.approx(700.0)

    def test_deterministic_replay(self, timing):
        mx = generate_matrix(TrafficModel.default(13, seed=3), 30, timing)
        a = run_selective(mx, timing, k=7, window=2, policy="weight_product")
        b = run_selective(mx, timing, k=7, window=2, policy="weight_product")
        assert a == b

    def test_include_bootstrap_changes_average_only(self, timing):
        mx = generate_matrix(TrafficModel.default(13, seed=3), 30, timing)
        _, excl = run_selective(mx, timing, k=7, window=2, policy="weight_product")
        _, incl = run_selective(
            mx, timing, k=7, window=2, policy="weight_product", include_bootstrap=True
        )
        assert excl.cost_ms == incl.cost_ms
        assert excl.switches == incl.switches
        assert excl.avg_selected_load != incl.avg_selected_load

    def test_constant_trace_full_probing_tracks_average(self, timing):
        # every channel probed every round: the wide-kernel posterior stays
        # close to the constant realized average
        mx = matrix_from([[0.4, 0.4]] * 20)
        _, s = run_selective(
            mx, timing, k=2, window=4, policy="weight_product",
            params=KernelParams(lengthscale=3),
        )
        assert s.err_avg < 0.05


class TestErrors:
    def test_true_loads_give_zero_error(self, timing):
        mx = matrix_from([[0.2, 0.7], [0.4, 0.1], [0.9, 0.5]])
        err_true, _ = per_channel_errors([0.9, 0.5], mx, round=2, window=2)
        assert err_true == (0.0, 0.0)

    def test_realized_window_average(self):
        mx = matrix_from([[0.2, 0.0], [0.4, 0.0], [0.9, 0.0]])
        assert realized_window_average(mx, 0, 1, 2) == pytest.approx(0.2)
        assert realized_window_average(mx, 1, 1, 2) == pytest.approx(0.3)
        assert realized_window_average(mx, 2, 1, 2) == pytest.approx(0.65)
        assert realized_window_average(mx, 2, 1, 3) == pytest.approx(0.5)

    def test_rejects_wrong_length(self, timing):
        mx = matrix_from([[0.2, 0.7]])
        with pytest.raises(ValueError, match="estimates"):
            per_channel_errors([0.5], mx, round=0, window=2)

    def test_estimation_error_requires_selective_records(self, timing):
        mx = matrix_from([[0.2, 0.7]])
        records, _ = run_exhaustive(mx, timing)
        with pytest.raises(ValueError, match="no records"):
            estimation_error(records)


class TestSweep:
    def test_cross_product_rows(self, timing):
        mx = generate_matrix(TrafficModel.default(13, seed=3), 30, timing)
        body = sweep(mx, timing, k_values=[2, 7], w_values=[2, 3],
                     policies=["weight_product", "benchmark_mavg"])
        keys = [(r["K"], r["w"], r["policy"]) for r in body["runs"]]
        assert len(keys) == 8
        assert keys == sorted(keys, key=lambda x: (x[0], x[1], x[2] != "weight_product"))
        assert set(body["exhaustive"]) == {"L1", "c1_ms"}

    def test_empty_policies_leave_exhaustive_row_only(self, timing):
        mx = generate_matrix(TrafficModel.default(13, seed=3), 30, timing)
        body = sweep(mx, timing, k_values=[2], w_values=[2], policies=[])
        assert body["runs"] == []
        assert body["exhaustive"]["c1_ms"] == 1300.0

    def test_rejects_empty_ranges(self, timing):
        mx = generate_matrix(TrafficModel.default(13, seed=3), 30, timing)
        with pytest.raises(ConfigError, match="non-empty"):
            sweep(mx, timing, k_values=[], w_values=[2], policies=["weight_product"])

    def test_full_measurement_rows_collapse_to_exhaustive(self, timing, reference_matrix):
        _, ex = run_exhaustive(reference_matrix, timing)
        body = sweep(reference_matrix, timing, k_values=[13], w_values=[2, 3, 4],
                     policies=["weight_product"], include_bootstrap=True)
        for row in body["runs"]:
            assert row["L2"] == pytest.approx(ex.avg_selected_load, abs=1e-12)


class TestResultsAssembly:
    def test_summary_row_shape(self, timing):
        mx = generate_matrix(TrafficModel.default(13, seed=3), 30, timing)
        _, s = run_selective(mx, timing, k=7, window=2, policy="weight_product")
        row = summary_row(s)
        assert set(row) == {"K", "w", "policy", "L2", "c2_ms", "err_true", "err_avg", "switches"}
        assert isinstance(row["L2"], float) and isinstance(row["switches"], int)

    def test_results_payload_shape(self, timing):
        config = make_config(
            channels=13, rounds=30, timing=timing, seed=1, source="default",
            params=KernelParams(), include_bootstrap=False, stay_on_tie=True,
            smooth_input=True,
        )
        payload = results_payload(config, {"exhaustive": {"L1": 0.1, "c1_ms": 1300.0}, "runs": []})
        assert set(payload) == {"config", "exhaustive", "runs"}
        assert payload["config"]["source"] == "default"

    def test_round_records_csv(self, timing):
        mx = generate_matrix(TrafficModel.default(13, seed=3), 12, timing)
        records, _ = run_selective(mx, timing, k=7, window=2, policy="weight_product")
        text = round_records_csv(records)
        lines = text.split("\n")
        assert lines[0].startswith("round,bootstrap,measured_set,")
        assert len(lines) == 1 + 12 + 1
        assert lines[1].startswith("0,1,")  # round 0 is a bootstrap round


class TestReferenceRegression:
    """Frozen values from the committed reference trace."""

    def test_exhaustive_baseline(self, timing, reference_matrix):
        _, ex = run_exhaustive(reference_matrix, timing)
        assert ex.avg_selected_load == pytest.approx(0.05188, abs=1e-12)
        assert ex.switches == 22

    @pytest.mark.parametrize(
        "k, w, l2, err_avg, switches",
        [
            (7, 2, 0.053717391304347835, 0.17912279948978668, 3),
            (7, 4, 0.06542857142857142, 0.16214105348997565, 7),
            (2, 2, 0.6090540540540541, 0.2516261568489885, 12),
            (10, 2, 0.052063829787234055, 0.17247115437478075, 22),
        ],
    )
    def test_weight_policy_cells(self, timing, reference_matrix, k, w, l2, err_avg, switches):
        _, s = run_selective(reference_matrix, timing, k=k, window=w, policy="weight_product")
        assert s.avg_selected_load == pytest.approx(l2, abs=1e-12)
        assert s.err_avg == pytest.approx(err_avg, abs=1e-12)
        assert s.switches == switches

    def test_other_policies(self, timing, reference_matrix):
        _, var = run_selective(reference_matrix, timing, k=7, window=2, policy="variance_only")
        assert var.avg_selected_load == pytest.approx(0.055000000000000014, abs=1e-12)
        _, bench = run_selective(reference_matrix, timing, k=7, window=2, policy="benchmark_mavg")
        assert bench.avg_selected_load == pytest.approx(0.052021739130434785, abs=1e-12)
        assert bench.err_avg == pytest.approx(0.02855183946488295, abs=1e-12)

    def test_more_probing_does_not_hurt(self, timing, reference_matrix):
        _, wide = run_selective(reference_matrix, timing, k=10, window=2, policy="weight_product")
        _, narrow = run_selective(reference_matrix, timing, k=2, window=2, policy="weight_product")
        assert wide.avg_selected_load <= narrow.avg_selected_load
        assert wide.err_avg < narrow.err_avg
