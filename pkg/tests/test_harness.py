"""Problem loading, experiment protocol, trace export and report formatting."""

import json

import numpy as np
import pytest

from ceed.harness import (
    ExperimentSpec,
    export_trace,
    format_report,
    load_problem,
    read_trace,
    run_experiment,
)
from ceed.model import DispatchError, InfeasibleError


def write_problem(tmp_path, name="problem.json", **overrides):
    doc = {
        "gases": ["nox", "cox", "sox"],
        "units": [
            {
                "id": 1,
                "p_min": 20.0,
                "p_max": 250.0,
                "cost": [120.0, 4.0, 0.010],
                "emissions": {
                    "nox": [8.0, 0.05, 0.0008],
                    "cox": [60.0, 1.1, 0.004],
                    "sox": [20.0, 0.3, 0.002],
                },
            },
            {
                "id": 2,
                "p_min": 30.0,
                "p_max": 300.0,
                "cost": [90.0, 6.5, 0.006],
                "emissions": {
                    "nox": [10.0, 0.06, 0.0011],
                    "cox": [70.0, 1.3, 0.005],
                    "sox": [25.0, 0.4, 0.0024],
                },
            },
        ],
    }
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_load_shipped_fixture(six_unit_path):
    problem = load_problem(six_unit_path, demand=1500.0)
    assert problem.n_units == 6
    assert len(problem.gases) == 3
    assert problem.demand == 1500.0


def test_demand_argument_overrides_file(tmp_path):
    path = write_problem(tmp_path, demand=100.0)
    assert load_problem(path).demand == 100.0
    assert load_problem(path, demand=333.0).demand == 333.0


def test_missing_demand_is_an_error(tmp_path):
    path = write_problem(tmp_path)
    with pytest.raises(DispatchError, match="no demand"):
        load_problem(path)


def test_parse_error_carries_line_info(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"units": [\n  {"id": 1,,}\n]}')
    with pytest.raises(DispatchError, match=r"broken\.json:2:"):
        load_problem(path)


def test_limit_violation_names_the_unit(tmp_path):
    path = write_problem(tmp_path)
    doc = json.loads(path.read_text())
    doc["units"][1]["p_min"] = 400.0  # above its p_max
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="unit 2"):
        load_problem(path, demand=100.0)


def test_missing_field_names_the_unit(tmp_path):
    path = write_problem(tmp_path)
    doc = json.loads(path.read_text())
    del doc["units"][0]["cost"]
    path.write_text(json.dumps(doc))
    with pytest.raises(DispatchError, match="unit #1"):
        load_problem(path, demand=100.0)


def test_unknown_gas_is_rejected(tmp_path):
    path = write_problem(tmp_path, gases=["nox", "smog"])
    with pytest.raises(DispatchError, match="unknown gas"):
        load_problem(path, demand=100.0)


def test_infeasible_demand_raises(tmp_path):
    path = write_problem(tmp_path)
    with pytest.raises(InfeasibleError):
        load_problem(path, demand=5000.0)


def test_small_loss_asymmetry_warns_and_symmetrizes(tmp_path):
    b = [[1e-5, 2e-6], [2e-6 + 1e-16, 1e-5]]
    path = write_problem(tmp_path, b_matrix=b)
    with pytest.warns(UserWarning, match="symmetrizing"):
        problem = load_problem(path, demand=100.0)
    assert problem.losses is not None
    assert np.array_equal(problem.losses.b, problem.losses.b.T)


def test_large_loss_asymmetry_is_rejected(tmp_path):
    b = [[1e-5, 2e-6], [5e-6, 1e-5]]
    path = write_problem(tmp_path, b_matrix=b)
    with pytest.raises(ValueError, match="asymmetric"):
        load_problem(path, demand=100.0)


def test_spec_validation():
    with pytest.raises(ValueError, match="demand"):
        ExperimentSpec(problem_path="x", demands=())
    with pytest.raises(ValueError, match="trials"):
        ExperimentSpec(problem_path="x", demands=(100.0,), trials=0)
    with pytest.raises(ValueError, match="solver"):
        ExperimentSpec(problem_path="x", demands=(100.0,), solver="annealing")


def quick_spec(path, **kw):
    defaults = dict(
        problem_path=str(path),
        demands=(330.0,),
        solver="pso",
        trials=3,
        iterations=40,
        base_seed=5,
    )
    defaults.update(kw)
    return ExperimentSpec(**defaults)


def test_single_trial_report_is_that_trial(tmp_path):
    path = write_problem(tmp_path)
    (report,) = run_experiment(quick_spec(path, trials=1))
    assert len(report.trials) == 1
    assert report.best_trial is report.trials[0]
    assert report.representative_trial is report.trials[0]


def test_experiment_is_deterministic_up_to_timing(tmp_path):
    path = write_problem(tmp_path)
    (r1,) = run_experiment(quick_spec(path))
    (r2,) = run_experiment(quick_spec(path))
    for t1, t2 in zip(r1.trials, r2.trials):
        assert t1.solution.powers == t2.solution.powers
        assert t1.seed == t2.seed
        assert np.array_equal(t1.trace, t2.trace)
    det1 = format_report(r1).split("-- timing")[0]
    det2 = format_report(r2).split("-- timing")[0]
    assert det1 == det2


def test_trial_seeds_follow_base_seed(tmp_path):
    path = write_problem(tmp_path)
    (report,) = run_experiment(quick_spec(path, base_seed=42))
    assert [t.seed for t in report.trials] == [42, 43, 44]


def test_both_solvers_and_demands_produce_one_report_each(tmp_path):
    path = write_problem(tmp_path)
    reports = run_experiment(quick_spec(path, solver="both", demands=(300.0, 400.0), trials=2))
    assert [(r.solver, r.demand) for r in reports] == [
        ("pso", 300.0),
        ("ga", 300.0),
        ("pso", 400.0),
        ("ga", 400.0),
    ]


def test_parallel_trials_match_serial(tmp_path):
    path = write_problem(tmp_path)
    (serial,) = run_experiment(quick_spec(path))
    (parallel,) = run_experiment(quick_spec(path, workers=2))
    for ts, tp in zip(serial.trials, parallel.trials):
        assert ts.solution.powers == tp.solution.powers


def test_report_identities_hold(tmp_path):
    path = write_problem(tmp_path)
    (report,) = run_experiment(quick_spec(path))
    h = report.h
    for trial in report.trials:
        s = trial.solution
        assert s.total_cost == pytest.approx(s.fuel_cost + s.emission_cost)
        ec = sum(h[gas] * s.emissions[gas] for gas in h.values)
        assert s.emission_cost == pytest.approx(ec)


def test_outputs_written(tmp_path):
    path = write_problem(tmp_path)
    out = tmp_path / "results"
    run_experiment(quick_spec(path, solver="both", trials=2, out_dir=str(out)))
    traces = sorted(p.name for p in out.glob("*.csv"))
    assert traces == [
        "ga_pd330_trial000.csv",
        "ga_pd330_trial001.csv",
        "pso_pd330_trial000.csv",
        "pso_pd330_trial001.csv",
    ]
    assert (out / "report.txt").read_text().count("solver=") == 2


def test_trace_export_round_trip(tmp_path):
    trace = np.array([105.0, 101.5, 101.5, 100.25])
    path = tmp_path / "trace.csv"
    export_trace(trace, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,objective"
    assert len(lines) == 5
    assert lines[1] == "1,105"
    recovered = read_trace(path)
    assert np.array_equal(recovered, trace)


def test_trace_export_matches_run_length(tmp_path):
    path = write_problem(tmp_path)
    (report,) = run_experiment(quick_spec(path, trials=1, iterations=500))
    fname = tmp_path / "t.csv"
    export_trace(report.trials[0].trace, fname)
    rows = fname.read_text().splitlines()
    assert len(rows) == 501
    values = np.array([float(r.split(",")[1]) for r in rows[1:]])
    assert np.all(np.diff(values) <= 1e-12)


def test_empty_trace_is_refused(tmp_path):
    with pytest.raises(ValueError):
        export_trace([], tmp_path / "empty.csv")
