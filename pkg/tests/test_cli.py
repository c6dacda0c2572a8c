import json
import math
import os

import numpy as np
import pytest

from swarmsgd import cli, engine, topology
from swarmsgd import objective as obj
from swarmsgd.cli import (
    ComparisonReport,
    ConfigError,
    ExperimentConfig,
    build_graph,
    build_objective,
    cmd_bounds,
    cmd_compare,
    cmd_simulate,
    cmd_sweep,
    cmd_validate,
    comparison_report_from_dict,
    comparison_report_to_dict,
    experiment_config_from_dict,
    load_experiment_config,
    main,
    predicted_crossing_updates,
)


def _config_dict(**overrides):
    data = {
        "objective": {"kind": "ridge", "dim": 4, "rho": 0.1},
        "run": {
            "n_threads": 5,
            "step_size": 0.01,
            "attraction": 1.0,
            "mean_sample_time": 0.02,
            "max_updates": 600,
            "record_every": 200,
        },
        "graph": {"kind": "complete"},
        "replications": 2,
        "threshold": 0.1,
        "master_seed": 17,
        "output_dir": "out",
    }
    data.update(overrides)
    return data


def test_config_defaults_and_parsing():
    cfg = experiment_config_from_dict(_config_dict())
    assert cfg.replications == 2
    assert cfg.threshold == 0.1
    assert cfg.run["scheme"] == engine.SCHEME_SWARM
    assert cfg.objective["noise_std"] == 1.0
    assert cfg.graph["fixed_across_replications"] is False
    assert cfg.validate["max_updates"] == 500


def test_config_errors_name_the_field():
    with pytest.raises(ConfigError, match="objective"):
        experiment_config_from_dict({"run": {"n_threads": 3}})
    with pytest.raises(ConfigError, match="objective.dim"):
        experiment_config_from_dict(_config_dict(objective={"kind": "ridge"}))
    with pytest.raises(ConfigError, match="run.n_threads"):
        experiment_config_from_dict(_config_dict(run={"step_size": 0.01}))
    with pytest.raises(ConfigError, match="unknown config field: run.step"):
        experiment_config_from_dict(
            _config_dict(run={"n_threads": 3, "step": 0.1, "max_updates": 10})
        )
    with pytest.raises(ConfigError, match="graph.file"):
        experiment_config_from_dict(_config_dict(graph={"kind": "file"}))
    with pytest.raises(ConfigError, match="scheme"):
        experiment_config_from_dict(
            _config_dict(run={"n_threads": 3, "scheme": "warp", "max_updates": 10})
        )
    with pytest.raises(ConfigError, match="threshold"):
        experiment_config_from_dict(_config_dict(threshold=-1.0))
    with pytest.raises(ConfigError, match="replications"):
        experiment_config_from_dict(_config_dict(replications=0))
    with pytest.raises(ConfigError):
        experiment_config_from_dict([1, 2])


def test_quadratic_config_requires_matrix():
    with pytest.raises(ConfigError, match="objective.Q"):
        experiment_config_from_dict(_config_dict(objective={"kind": "quadratic"}))
    cfg = experiment_config_from_dict(
        _config_dict(objective={"kind": "quadratic", "Q": [[1.0]], "b": [0.0]})
    )
    spec = build_objective(cfg)
    assert spec.kind == obj.QUADRATIC and spec.dim == 1


def test_build_objective_ridge_target_is_seeded():
    cfg = experiment_config_from_dict(_config_dict())
    a = build_objective(cfg)
    b = build_objective(cfg)
    assert np.array_equal(a.x_tilde, b.x_tilde)
    other = experiment_config_from_dict(_config_dict(master_seed=18))
    c = build_objective(other)
    assert not np.array_equal(a.x_tilde, c.x_tilde)

    explicit = experiment_config_from_dict(
        _config_dict(objective={"kind": "ridge", "dim": 2, "x_tilde": [0.25, 0.75]})
    )
    assert np.allclose(build_objective(explicit).x_tilde, [0.25, 0.75])


def test_build_graph_modes(tmp_path):
    cfg = experiment_config_from_dict(_config_dict())
    g = build_graph(cfg, 0)
    assert np.array_equal(g.adjacency, topology.complete_graph(5).adjacency)

    er = experiment_config_from_dict(_config_dict(graph={"kind": "erdos_renyi", "p": 0.9}))
    g0a = build_graph(er, 0)
    g0b = build_graph(er, 0)
    g1 = build_graph(er, 1)
    assert np.array_equal(g0a.adjacency, g0b.adjacency)
    assert not np.array_equal(g0a.adjacency, g1.adjacency)

    pinned = experiment_config_from_dict(
        _config_dict(graph={"kind": "erdos_renyi", "p": 0.9, "fixed_across_replications": True})
    )
    assert np.array_equal(build_graph(pinned, 0).adjacency, build_graph(pinned, 3).adjacency)

    path = tmp_path / "g.json"
    topology.save_graph(topology.path_graph(5), str(path))
    from_file = experiment_config_from_dict(
        _config_dict(graph={"kind": "file", "file": str(path)})
    )
    assert np.array_equal(build_graph(from_file, 0).adjacency, topology.path_graph(5).adjacency)

    wrong_n = experiment_config_from_dict(
        _config_dict(
            graph={"kind": "file", "file": str(path)},
            run={"n_threads": 6, "max_updates": 10},
        )
    )
    with pytest.raises(ConfigError):
        build_graph(wrong_n, 0)


def test_default_edge_probability_is_clamped():
    cfg = experiment_config_from_dict(
        _config_dict(run={"n_threads": 6, "max_updates": 10}, graph={"kind": "erdos_renyi"})
    )
    # 10/6 > 1 collapses to the complete graph
    g = build_graph(cfg, 0)
    assert np.array_equal(g.adjacency, topology.complete_graph(6).adjacency)


def test_predicted_crossing_updates():
    spec = obj.ridge_spec(0.1, np.full(4, 0.9))
    k_loose = predicted_crossing_updates(spec, 0.01, 0.5)
    k_tight = predicted_crossing_updates(spec, 0.01, 0.01)
    assert k_loose is not None and k_tight is not None
    assert 0 < k_loose < k_tight
    sine = obj.nonconvex_sine_spec(3)
    assert predicted_crossing_updates(sine, 0.01, 0.1) is None


def test_cmd_simulate_outputs_and_determinism(tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    cfg1 = experiment_config_from_dict(_config_dict(output_dir=out1))
    cfg2 = experiment_config_from_dict(_config_dict(output_dir=out2))
    report1 = cmd_simulate(cfg1)
    report2 = cmd_simulate(cfg2)
    assert report1["replications"] == 2
    for name in ("run_0000.csv", "run_0001.csv", "summary.json"):
        b1 = (tmp_path / "a" / name).read_bytes()
        b2 = (tmp_path / "b" / name).read_bytes()
        assert b1 == b2
    loaded = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert loaded["replications"] == 2
    assert len(loaded["runs"]) == 2
    assert report2["n_hit"] == report1["n_hit"]


def test_cmd_simulate_jobs_parallel_identical(tmp_path):
    out1, out2 = str(tmp_path / "serial"), str(tmp_path / "parallel")
    cmd_simulate(experiment_config_from_dict(_config_dict(output_dir=out1)), jobs=1)
    cmd_simulate(experiment_config_from_dict(_config_dict(output_dir=out2)), jobs=2)
    for name in ("run_0000.csv", "run_0001.csv", "summary.json"):
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes()


def test_cmd_simulate_centralized_scheme(tmp_path):
    cfg = experiment_config_from_dict(
        _config_dict(
            output_dir=str(tmp_path / "c"),
            run={"n_threads": 5, "scheme": engine.SCHEME_CENTRALIZED, "max_updates": 50},
        )
    )
    report = cmd_simulate(cfg)
    assert report["scheme"] == engine.SCHEME_CENTRALIZED
    assert all(r["n_samples"] == 5 * r["n_updates"] for r in report["runs"])


def test_cmd_compare_report_and_mean_identity(tmp_path):
    cfg = experiment_config_from_dict(
        _config_dict(
            output_dir=str(tmp_path / "cmp"),
            replications=3,
            run={"n_threads": 5, "step_size": 0.01, "mean_sample_time": 0.02},
        )
    )
    report = cmd_compare(cfg)
    assert isinstance(report, ComparisonReport)
    assert report.instance == (4, 5)
    assert report.predicted_ratio == pytest.approx(sum(1 / i for i in range(1, 6)))
    included = [r for r in report.per_run if r["T_s"] is not None and r["T_c"] is not None]
    assert included, "expected the tiny instance to cross"
    # the per-run rows must reproduce the reported means exactly
    assert report.T_s_mean == pytest.approx(
        sum(r["T_s"] for r in included) / len(included), rel=1e-12
    )
    assert report.T_c_mean == pytest.approx(
        sum(r["T_c"] for r in included) / len(included), rel=1e-12
    )
    assert report.ratio == pytest.approx(report.T_c_mean / report.T_s_mean, rel=1e-12)
    seeds = {r["seed"] for r in report.per_run}
    assert len(seeds) == 3  # one swarm stream per replication
    data = json.loads((tmp_path / "cmp" / "comparison.json").read_text())
    back = comparison_report_from_dict(data)
    assert back.T_s_mean == report.T_s_mean
    assert back.excluded == report.excluded
    round_trip = comparison_report_from_dict(comparison_report_to_dict(report))
    assert round_trip == report or round_trip.T_s_mean == report.T_s_mean


def test_cmd_compare_excludes_non_crossing_runs(tmp_path):
    # a horizon far too small for any crossing forces exclusions
    cfg = experiment_config_from_dict(
        _config_dict(
            output_dir=str(tmp_path / "none"),
            replications=2,
            threshold=1e-9,
            run={"n_threads": 5, "max_virtual_time": 0.02},
        )
    )
    report = cmd_compare(cfg)
    assert report.excluded == (0, 1)
    assert report.T_s_mean is None and report.ratio is None


def test_cmd_compare_requires_threshold(tmp_path):
    cfg = experiment_config_from_dict(
        _config_dict(output_dir=str(tmp_path / "x"), threshold=None)
    )
    with pytest.raises(ConfigError, match="threshold"):
        cmd_compare(cfg)


def test_compare_determinism(tmp_path):
    kwargs = dict(replications=2)
    cfg1 = experiment_config_from_dict(
        _config_dict(output_dir=str(tmp_path / "r1"), **kwargs)
    )
    cfg2 = experiment_config_from_dict(
        _config_dict(output_dir=str(tmp_path / "r2"), **kwargs)
    )
    cmd_compare(cfg1)
    cmd_compare(cfg2)
    assert (tmp_path / "r1" / "comparison.json").read_bytes() == (
        tmp_path / "r2" / "comparison.json"
    ).read_bytes()


def _bounds_params(**overrides):
    params = {
        "kappa": 0.8667,
        "L": 0.8667,
        "sigma_sq": 1.0,
        "gamma": 0.01,
        "a": 1.0,
        "lambda2": 6.0,
        "d_bar": 5.0,
        "N": 6,
    }
    params.update(overrides)
    return params


def test_cmd_bounds_report(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(_bounds_params()))
    report = cmd_bounds(str(path), str(tmp_path / "out"))
    assert report["harmonic"]["H_N"] == pytest.approx(sum(1 / i for i in range(1, 7)))
    assert report["strong_convex"]["admissible"] is True
    assert report["centralized"]["admissible"] is True
    assert report["convex"]["admissible"] is True
    assert (tmp_path / "out" / "bounds.json").exists()


def test_cmd_bounds_huge_step_all_inadmissible(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(_bounds_params(gamma=10.0)))
    report = cmd_bounds(str(path), None)
    assert report["strong_convex"]["admissible"] is False
    assert report["centralized"]["admissible"] is False
    assert report["convex"]["admissible"] is False
    assert report["nonconvex"]["admissible"] is False


def test_cmd_bounds_missing_field(tmp_path):
    path = tmp_path / "p.json"
    params = _bounds_params()
    del params["lambda2"]
    path.write_text(json.dumps(params))
    with pytest.raises(ConfigError, match="lambda2"):
        cmd_bounds(str(path), None)


def test_cmd_validate(tmp_path):
    cfg = experiment_config_from_dict(
        _config_dict(
            output_dir=str(tmp_path / "val"),
            validate={
                "max_updates": 120,
                "record_every": 30,
                "lemma2_states": 2,
                "lemma2_replications": 1500,
                "sigma_samples": 6000,
            },
        )
    )
    report = cmd_validate(cfg)
    assert report["lemma4_violations"] == 0
    assert report["lemma4_checks"] == len(
        [c for c in report["checks"] if c["check"] == "lemma4"]
    )
    assert report["lemma2_checks"] == 2
    for c in report["checks"]:
        assert set(c) >= {"check", "k", "holds", "lhs", "rhs"}
    assert (tmp_path / "val" / "validation.json").exists()


def test_cmd_sweep(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text(
        json.dumps(
            {
                "base": {"kappa": 0.8667, "L": 0.8667, "sigma_sq": 1.0},
                "grid": {"gamma": [0.005, 0.01], "a": [1.0], "N": [6]},
            }
        )
    )
    out = cmd_sweep(str(path), str(tmp_path / "out"))
    lines = open(out).read().splitlines()
    assert lines[0] == "family,gamma,a,N,lambda2,d_bar,admissible,omega,rate,bound"
    assert len(lines) == 1 + 2 * 4  # two gammas, four bound families
    families = {line.split(",")[0] for line in lines[1:]}
    assert families == {"strong_convex", "centralized", "convex", "nonconvex"}
    for line in lines[1:]:
        assert line.split(",")[6] in ("0", "1")


def test_main_exit_codes(tmp_path):
    good = tmp_path / "exp.json"
    good.write_text(json.dumps(_config_dict(output_dir=str(tmp_path / "sim"))))
    assert main(["simulate", "--config", str(good)]) == 0

    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"objective": {"kind": "ridge"}}))
    assert main(["simulate", "--config", str(missing)]) == 2
    assert main(["simulate", "--config", str(tmp_path / "nope.json")]) == 2

    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{")
    assert main(["bounds", "--config", str(bad_json)]) == 2

    with pytest.raises(SystemExit):
        main(["unknown-command"])
    with pytest.raises(SystemExit):
        main(["simulate"])  # --config is required


def test_main_runtime_error_is_exit_1(tmp_path):
    cfg = _config_dict(
        graph={"kind": "file", "file": str(tmp_path / "absent.json")},
        output_dir=str(tmp_path / "sim"),
    )
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    assert main(["simulate", "--config", str(path)]) == 1


def test_main_overrides(tmp_path):
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(_config_dict(output_dir=str(tmp_path / "ignored"))))
    out = tmp_path / "chosen"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "summary.json").exists()

    out2 = tmp_path / "seeded"
    assert (
        main(["simulate", "--config", str(cfg_path), "--out", str(out2), "--seed", "99"]) == 0
    )
    assert (out / "run_0000.csv").read_bytes() != (out2 / "run_0000.csv").read_bytes()


def test_main_bounds_and_sweep_commands(tmp_path, capsys):
    bounds_path = tmp_path / "b.json"
    bounds_path.write_text(json.dumps(_bounds_params()))
    assert main(["bounds", "--config", str(bounds_path), "--out", str(tmp_path / "bo")]) == 0
    out = capsys.readouterr().out
    assert "harmonic" in out

    sweep_path = tmp_path / "s.json"
    sweep_path.write_text(
        json.dumps({"base": {"kappa": 1.0, "L": 1.0, "sigma_sq": 1.0}, "grid": {}})
    )
    assert main(["sweep", "--config", str(sweep_path), "--out", str(tmp_path / "so")]) == 0
    assert (tmp_path / "so" / "sweep.csv").exists()


def test_main_validate_command(tmp_path):
    cfg = _config_dict(
        output_dir=str(tmp_path / "val"),
        validate={
            "max_updates": 60,
            "record_every": 20,
            "lemma2_states": 1,
            "lemma2_replications": 1200,
            "sigma_samples": 5000,
        },
    )
    path = tmp_path / "v.json"
    path.write_text(json.dumps(cfg))
    assert main(["validate", "--config", str(path)]) == 0


def test_compare_horizon_requires_prediction_or_time(tmp_path):
    # a nonconvex objective has no closed-form crossing prediction, so
    # compare demands an explicit horizon
    cfg = experiment_config_from_dict(
        _config_dict(
            objective={"kind": "nonconvex_sine", "dim": 3},
            output_dir=str(tmp_path / "nc"),
        )
    )
    cfg = ExperimentConfig(
        **{
            **cfg.__dict__,
            "run": {**cfg.run, "max_updates": None, "max_virtual_time": None},
        }
    )
    with pytest.raises(ConfigError, match="max_virtual_time"):
        cli._compare_horizons(cfg, build_objective(cfg))
