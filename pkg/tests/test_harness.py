import math

import numpy as np
import pytest

from dassim import ExperimentConfig, Trajectory, rmse, run_experiment, write_csv, write_metrics
from dassim.cli import cli_main


@pytest.fixture(scope="module")
def default_result():
    return run_experiment(ExperimentConfig())


def small_config(**overrides):
    settings = dict(steps=120, seed=7)
    settings.update(overrides)
    return ExperimentConfig(**settings)


class TestRmse:
    def setup_method(self):
        states = np.column_stack([np.linspace(0.0, 1.0, 11), np.zeros(11)])
        self.truth = Trajectory(dt=0.1, states=states)

    def test_zero_for_exact_estimates(self):
        assert rmse(self.truth.states, self.truth, 0, range(11)) == 0.0

    def test_constant_offset(self):
        shifted = self.truth.states + np.array([1.0, 0.0])
        assert rmse(shifted, self.truth, 0, range(11)) == pytest.approx(1.0, abs=1e-15)

    def test_matches_direct_summation(self):
        rng = np.random.default_rng(15)
        estimates = self.truth.states + rng.standard_normal((11, 2))
        window = range(3, 9)
        direct = math.sqrt(
            sum((estimates[k][1] - self.truth.states[k][1]) ** 2 for k in window) / len(window)
        )
        assert rmse(estimates, self.truth, 1, window) == pytest.approx(direct, rel=1e-14)

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError, match="window"):
            rmse(self.truth.states, self.truth, 0, range(0))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length"):
            rmse(self.truth.states[:5], self.truth, 0, range(5))


class TestConfigValidation:
    @pytest.mark.parametrize(
        "overrides",
        [
            dict(dt=0.0),
            dict(steps=0),
            dict(r_var=0.0),
            dict(ensemble_size=1),
            dict(methods=("kf", "ukf")),
            dict(solver="newton"),
            dict(obs_stride=0),
            dict(gd_step=-1.0),
        ],
    )
    def test_bad_values_rejected_before_any_work(self, overrides):
        with pytest.raises(ValueError):
            run_experiment(ExperimentConfig(**overrides))


class TestRunExperiment:
    def test_series_lengths_match_truth(self):
        result = run_experiment(small_config())
        assert len(result.truth) == 121
        assert len(result.observations) == 121
        for series in result.series.values():
            assert len(series) == 121

    def test_no_methods_gives_truth_and_observations_only(self):
        result = run_experiment(small_config(methods=()))
        assert set(result.series) == {"openloop"}
        assert result.kf_p11 is None
        assert all(z is not None for z in result.observations)

    def test_observation_stride_leaves_gaps(self):
        result = run_experiment(small_config(obs_stride=5))
        present = [k for k, z in enumerate(result.observations) if z is not None]
        assert present == list(range(0, 121, 5))

    def test_shared_data_is_method_independent(self):
        full = run_experiment(small_config())
        kf_only = run_experiment(small_config(methods=("kf",)))
        assert np.array_equal(full.truth.states, kf_only.truth.states)
        assert np.array_equal(full.series["kf"], kf_only.series["kf"])

    def test_metrics_keys(self, default_result):
        metrics = default_result.metrics
        assert metrics["seed"] == 42 and metrics["steps"] == 2000
        for method in ("kf", "enkf", "var3d", "openloop"):
            for suffix in ("rmse_x1", "rmse_x2", "rmse_x1_secondhalf"):
                assert f"{method}_{suffix}" in metrics

    def test_filters_beat_raw_observations(self, default_result):
        metrics = default_result.metrics
        assert metrics["kf_rmse_x1_secondhalf"] < math.sqrt(0.01)
        assert metrics["enkf_rmse_x1_secondhalf"] < math.sqrt(0.01)

    def test_filters_beat_open_loop(self, default_result):
        metrics = default_result.metrics
        assert metrics["kf_rmse_x1_secondhalf"] < metrics["openloop_rmse_x1_secondhalf"]
        assert metrics["enkf_rmse_x1_secondhalf"] < metrics["openloop_rmse_x1_secondhalf"]

    def test_static_background_var3d_trails_kalman(self, default_result):
        metrics = default_result.metrics
        assert metrics["kf_rmse_x1"] < metrics["var3d_rmse_x1"]

    def test_default_run_completes_quickly(self):
        import time

        start = time.perf_counter()
        run_experiment(ExperimentConfig())
        assert time.perf_counter() - start < 5.0


class TestOutputs:
    def test_csv_layout(self, tmp_path):
        result = run_experiment(small_config(obs_stride=3))
        path = tmp_path / "run.csv"
        write_csv(result, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "step,t,truth_x1,truth_x2,obs_z,kf_x1,kf_x2,kf_p11,enkf_x1,enkf_x2,var3d_x1,var3d_x2"
        assert len(lines) == 122  # header + steps + 1
        # strided-out observations are empty fields
        assert lines[2].split(",")[4] == ""
        assert lines[1].split(",")[4] != ""

    def test_csv_omits_unselected_methods(self, tmp_path):
        result = run_experiment(small_config(methods=("enkf",)))
        path = tmp_path / "run.csv"
        write_csv(result, path)
        header = path.read_text().splitlines()[0]
        assert header == "step,t,truth_x1,truth_x2,obs_z,enkf_x1,enkf_x2"

    def test_csv_floats_round_trip(self, tmp_path):
        result = run_experiment(small_config(methods=("kf",)))
        path = tmp_path / "run.csv"
        write_csv(result, path)
        rows = [line.split(",") for line in path.read_text().splitlines()[1:]]
        parsed_truth = np.array([[float(r[2]), float(r[3])] for r in rows])
        assert np.array_equal(parsed_truth, result.truth.states)
        parsed_kf = np.array([[float(r[5]), float(r[6])] for r in rows])
        assert np.array_equal(parsed_kf, result.series["kf"])

    def test_metrics_file_format(self, tmp_path):
        result = run_experiment(small_config())
        path = tmp_path / "run.metrics"
        write_metrics(result, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "seed=7"
        for line in lines:
            key, value = line.split("=")
            assert key == key.lower()
            float(value)  # every value parses as a number

    def test_byte_identical_reruns(self, tmp_path):
        for label in ("a", "b"):
            result = run_experiment(small_config())
            write_csv(result, tmp_path / f"{label}.csv")
            write_metrics(result, tmp_path / f"{label}.metrics")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.metrics").read_bytes() == (tmp_path / "b.metrics").read_bytes()

    def test_write_error_names_path(self, tmp_path):
        result = run_experiment(small_config())
        missing = tmp_path / "nope" / "run.csv"
        with pytest.raises(OSError, match="nope"):
            write_csv(result, missing)


class TestCli:
    def test_run_writes_outputs(self, tmp_path, capsys):
        csv_path = tmp_path / "out.csv"
        metrics_path = tmp_path / "out.metrics"
        code = cli_main([
            "run", "--steps", "60", "--seed", "5",
            "--out-csv", str(csv_path), "--out-metrics", str(metrics_path),
        ])
        assert code == 0
        assert csv_path.exists() and metrics_path.exists()
        out = capsys.readouterr().out
        assert "kf_rmse_x1=" in out

    def test_help_exits_zero(self, capsys):
        assert cli_main(["--help"]) == 0
        assert "run" in capsys.readouterr().out

    def test_unknown_flag_is_usage_error(self, capsys):
        assert cli_main(["run", "--bogus"]) == 2

    def test_invalid_value_is_usage_error(self, capsys):
        assert cli_main(["run", "--steps", "0"]) == 2
        assert "bad arguments" in capsys.readouterr().err

    def test_runtime_failure_exits_one(self, tmp_path, capsys):
        missing = tmp_path / "absent" / "out.csv"
        code = cli_main(["run", "--steps", "30", "--out-csv", str(missing)])
        assert code == 1
        assert "absent" in capsys.readouterr().err

    def test_methods_flag_subsets_columns(self, tmp_path):
        csv_path = tmp_path / "out.csv"
        assert cli_main(["run", "--steps", "30", "--methods", "kf", "--out-csv", str(csv_path)]) == 0
        assert csv_path.read_text().splitlines()[0] == "step,t,truth_x1,truth_x2,obs_z,kf_x1,kf_x2,kf_p11"

    def test_empty_methods_allowed(self, tmp_path):
        csv_path = tmp_path / "out.csv"
        assert cli_main(["run", "--steps", "30", "--methods", "", "--out-csv", str(csv_path)]) == 0
        assert csv_path.read_text().splitlines()[0] == "step,t,truth_x1,truth_x2,obs_z"
