import csv
import json

import numpy as np
import pytest

from asgf.cli import main
from asgf.harness import (
    ExperimentPlan,
    SUMMARY_COLUMNS,
    TRACE_COLUMNS,
    compare,
    default_worker_count,
    emit_convergence_plot_data,
    load_config_file,
    read_trace_csv,
    run_experiment,
    run_trial,
)
from asgf.optimizer import RunTrace


def trace_of(values, start=10):
    return [RunTrace(i + 1, v, v, 1.0, 0.1, start * (i + 1), "sigma_decreased") for i, v in enumerate(values)]


class TestRunExperiment:
    def test_sphere_summary_and_files(self, tmp_path):
        plan = ExperimentPlan("sphere-10", "asgf", trial_count=20, base_seed=0, output_path=tmp_path)
        row, trials = run_experiment(plan, return_trials=True)
        assert row.success_rate == 1.0
        assert 6 <= row.mean_iterations_on_success <= 48
        out = tmp_path / "sphere-10_asgf"
        assert len(list(out.glob("trial_*.csv"))) == 20
        doc = json.loads((out / "summary.json").read_text())
        assert doc["summary"] == row.to_dict()
        assert doc["config"]["sigma0"] == pytest.approx(plan.spec.default_sigma0)
        for t in trials:
            rows = read_trace_csv(out / f"trial_{t.index:04d}.csv")
            assert rows == t.trace
            assert rows[-1].cumulative_evaluations == t.evaluations

    def test_frozen_es_never_succeeds(self):
        plan = ExperimentPlan("ackley-3", "es", trial_count=4,
                              algorithm_config=dict(learning_rate=0.0, max_iterations=20))
        row = run_experiment(plan)
        assert row.success_rate == 0.0
        assert row.mean_iterations_on_success is None and row.mean_evaluations_on_success is None

    def test_summary_json_is_byte_identical(self, tmp_path):
        paths = []
        for name in ("a", "b"):
            plan = ExperimentPlan("ackley-2", "asgf", trial_count=5, base_seed=3, output_path=tmp_path / name)
            run_experiment(plan)
            paths.append(tmp_path / name / "ackley-2_asgf" / "summary.json")
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_shared_initial_points(self):
        a = ExperimentPlan("levy-3", "asgf", trial_count=2, base_seed=7)
        b = ExperimentPlan("levy-3", "dgs", trial_count=2, base_seed=7,
                           algorithm_config=dict(max_iterations=1))
        ta, tb = run_trial(a, 1), run_trial(b, 1)
        # Both start at x0 drawn from seed 8: ASGF evaluates it first, DGS reads it off the center node.
        x0 = np.random.default_rng(8).uniform(-10, 10, size=3)
        f0 = a.spec(x0)
        assert tb.trace[0].current_value == f0
        assert ta.seed == tb.seed == 8

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_errors_become_failed_trials(self):
        plan = ExperimentPlan("sphere-2", "asgf", trial_count=2, algorithm_config=dict(max_iterations=0))
        with pytest.raises(ValueError):
            run_trial(plan, 0)  # invalid config is a plan error, not a trial failure
        plan = ExperimentPlan("sphere-2", "es", trial_count=2,
                              algorithm_config=dict(learning_rate=1e300, max_iterations=5))
        row, trials = run_experiment(plan, return_trials=True)
        assert row.success_rate == 0.0
        assert all(t.status == "error" and t.error for t in trials)

    def test_workers_do_not_change_statistics(self):
        kw = dict(benchmark="ackley-2", algorithm="asgf", trial_count=6, base_seed=1)
        one = run_experiment(ExperimentPlan(worker_count=1, **kw))
        four = run_experiment(ExperimentPlan(worker_count=4, **kw))
        assert one == four

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            ExperimentPlan("sphere-2", "cma")
        with pytest.raises(ValueError):
            ExperimentPlan("sphere-2", trial_count=0)


class TestCompare:
    def test_asgf_vs_dgs_with_external(self, tmp_path):
        ext = tmp_path / "cma.csv"
        with open(ext, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SUMMARY_COLUMNS)
            w.writerow(["ackley-5", "cma", "0.91", "151", "1,208", "100"])
        plans = [ExperimentPlan("ackley-5", a, trial_count=10, base_seed=0) for a in ("asgf", "dgs")]
        table = compare(plans, external=[ext], output_path=tmp_path)
        assert [r["algorithm"] for r in table.rows] == ["asgf", "dgs", "cma"]
        assert float(table.rows[0]["success_rate"]) >= 0.9
        assert table.rows[2] == {"benchmark": "ackley-5", "algorithm": "cma", "success_rate": "0.91",
                                 "mean_iterations_on_success": "151",
                                 "mean_evaluations_on_success": "1,208", "trial_count": "100"}
        assert (tmp_path / "comparison.csv").read_text() == table.to_csv()
        text = (tmp_path / "comparison.txt").read_text().splitlines()
        assert len(text) == 5 and text[0].startswith("benchmark")

    def test_single_plan_matches_run(self):
        plan = ExperimentPlan("sphere-3", "asgf", trial_count=3)
        table = compare([plan])
        row = run_experiment(plan)
        assert len(table.rows) == 1
        assert table.rows[0]["success_rate"] == repr(row.success_rate)
        assert table.rows[0]["mean_iterations_on_success"] == repr(row.mean_iterations_on_success)

    def test_mismatched_benchmarks(self):
        with pytest.raises(ValueError):
            compare([ExperimentPlan("sphere-3", trial_count=1), ExperimentPlan("sphere-4", trial_count=1)])


class TestPlotData:
    def test_single_trace(self, tmp_path):
        path = emit_convergence_plot_data([trace_of([3.0, 2.0, 1.0])], tmp_path / "c.csv")
        rows = list(csv.reader(open(path)))
        assert len(rows) == 4
        assert rows[0][:3] == ["iteration", "best_0", "evals_0"]

    def test_quartiles_on_toy_matrix(self, tmp_path):
        # Four traces, three iterations; column-wise values a < b < c < d.
        # Linear interpolation: q1 = a + 0.75 (b - a), median = (b + c) / 2, q3 = c + 0.25 (d - c).
        values = [[1.0, 0.5, 0.25], [2.0, 1.0, 0.5], [4.0, 3.0, 1.0], [8.0, 6.0, 2.0]]
        path = emit_convergence_plot_data([trace_of(v) for v in values], tmp_path / "q.csv",
                                          svg_path=tmp_path / "q.svg")
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        expected = {
            0: (1.0, 1.75, 3.0, 5.0, 8.0),
            1: (0.5, 0.875, 2.0, 3.75, 6.0),
            2: (0.25, 0.4375, 0.75, 1.25, 2.0),
        }
        for i, (mn, q1, med, q3, mx) in expected.items():
            r = rows[i]
            assert [float(r[k]) for k in ("min", "q1", "median", "q3", "max")] == [mn, q1, med, q3, mx]
        assert (tmp_path / "q.svg").read_text().startswith("<svg")

    def test_uneven_lengths_are_padded(self, tmp_path):
        path = emit_convergence_plot_data([trace_of([3.0]), trace_of([5.0, 4.0])], tmp_path / "p.csv")
        rows = list(csv.DictReader(open(path)))
        assert rows[1]["best_0"] == "3.0" and rows[1]["evals_0"] == "10"

    def test_empty(self, tmp_path):
        with pytest.raises(ValueError):
            emit_convergence_plot_data([], tmp_path / "e.csv")
        assert not (tmp_path / "e.csv").exists()


class TestConfigAndEnv:
    def test_config_file(self, tmp_path):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[asgf]\nsigma0 = 2.5\nreset_budget = 0\n\n[dgs]\nlearning_rate = 0.03\n")
        assert load_config_file(cfg, "asgf") == {"sigma0": 2.5, "reset_budget": 0}
        assert load_config_file(cfg, "dgs") == {"learning_rate": 0.03}
        assert load_config_file(cfg, "es") == {}
        cfg.write_text("[asgf]\nbogus = 1\n")
        with pytest.raises(ValueError):
            load_config_file(cfg, "asgf")

    def test_worker_env(self, monkeypatch):
        monkeypatch.delenv("ASGF_WORKERS", raising=False)
        assert default_worker_count() == 1
        monkeypatch.setenv("ASGF_WORKERS", "3")
        assert default_worker_count() == 3


class TestCli:
    def test_list(self, capsys):
        assert main(["list-benchmarks"]) == 0
        out = capsys.readouterr().out
        assert "rastrigin" in out and "cross-in-tray" in out

    def test_run_with_config_and_override(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("ASGF_WORKERS", "1")
        cfg = tmp_path / "c.ini"
        cfg.write_text("[asgf]\nsigma0 = 2.5\neps_m = 0.2\n")
        assert main(["run", "--benchmark", "sphere-3", "--algo", "asgf", "--trials", "2", "--seed", "4",
                     "--out", str(tmp_path), "--config", str(cfg), "--set", "eps_m=0.05"]) == 0
        assert json.loads(capsys.readouterr().out)["success_rate"] == 1.0
        doc = json.loads((tmp_path / "sphere-3_asgf" / "summary.json").read_text())
        assert doc["config"]["sigma0"] == 2.5 and doc["config"]["eps_m"] == 0.05
        assert doc["plan"]["workers_env"] == "1" and doc["plan"]["base_seed"] == 4

    def test_compare(self, tmp_path, capsys):
        assert main(["compare", "--benchmark", "sphere-2", "--algos", "asgf,dgs", "--trials", "2",
                     "--out", str(tmp_path), "--set", "dgs.learning_rate=0.1", "--workers", "1"]) == 0
        out = capsys.readouterr().out
        assert "asgf" in out and "dgs" in out
        assert (tmp_path / "comparison.csv").exists()

    def test_trace(self, tmp_path, capsys):
        assert main(["trace", "--benchmark", "branin", "--seed", "1", "--out", str(tmp_path)]) == 0
        out = tmp_path / "branin-2_asgf"
        header = next(csv.reader(open(out / "convergence.csv")))
        assert header[0] == "iteration" and "median" in header
        assert (out / "convergence.svg").exists()
        assert next(csv.reader(open(out / "trial_0000.csv"))) == TRACE_COLUMNS

    def test_bad_set(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["run", "--benchmark", "sphere-2", "--out", str(tmp_path), "--set", "nonsense=1"])
