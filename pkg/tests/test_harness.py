"""Fitting utilities, experiment configs, the runner, and the oracle-check suite."""
import json
import math
import os

import numpy as np
import pytest

from cpdilute import harness
from cpdilute.harness import (ExperimentConfig, HarnessError, estimate_gamma2,
                              fit_exponential, fit_loglinear, fit_power_law,
                              geometric_schedule, oracle_check, run_experiment)


def test_fit_power_law_exact():
    t = np.array([1.0, 2.0, 5.0, 10.0, 50.0, 100.0])
    pts = list(zip(t, t ** -0.5))
    fit = fit_power_law(pts, (1.0, 100.0))
    assert abs(fit.slope + 0.5) < 1e-12
    assert fit.r_squared > 1 - 1e-12
    assert fit.window == (1.0, 100.0)
    with pytest.raises(HarnessError):
        fit_power_law(pts, (60.0, 100.0))  # only 2 points inside


def test_fit_exponential_exact_and_discrimination():
    t = np.arange(1.0, 31.0)
    u = np.exp(-0.1 * t)
    fit = fit_exponential(list(zip(t, u)), (1.0, 30.0))
    assert abs(fit.slope + 0.1) < 1e-12
    assert fit.r_squared > 1 - 1e-12
    # the same data fit as a power law explains less variance
    pw = fit_power_law(list(zip(t, u)), (1.0, 30.0))
    assert pw.r_squared < fit.r_squared


def test_fit_power_law_drops_zero_density():
    pts = [(1.0, 1.0), (2.0, 0.5), (4.0, 0.25), (8.0, 0.0), (16.0, 0.0)]
    fit = fit_power_law(pts, (1.0, 16.0))
    assert abs(fit.slope + 1.0) < 1e-12


def test_fit_loglinear_needs_three_points():
    with pytest.raises(HarnessError):
        fit_loglinear([1.0, 2.0], [1.0, 2.0], logx=True)


def test_estimate_gamma2_synthetic():
    sizes = [10, 20, 30, 40]
    times = [math.exp(0.2 * n + 1.0) for n in sizes]
    fit = estimate_gamma2(sizes, times)
    assert abs(fit.slope - 0.2) < 1e-12
    rng = np.random.default_rng(0)
    noisy = [t * math.exp(rng.normal(0, 0.05)) for t in times]
    assert abs(estimate_gamma2(sizes, noisy).slope - 0.2) < 0.02


def test_estimate_gamma2_censoring_is_an_error():
    with pytest.raises(HarnessError, match=r"\[20, 40\]"):
        estimate_gamma2([10, 20, 30, 40], [1.0, 2.0, 3.0, 4.0],
                        censored=[False, True, False, True])
    with pytest.raises(HarnessError):
        estimate_gamma2([10, 20], [1.0, 2.0])


def test_geometric_schedule():
    sched = geometric_schedule(0.5, 2.0, 4)
    assert np.allclose(sched, [0.5, 1.0, 2.0, 4.0])
    for bad in ((0.0, 2.0, 4), (1.0, 1.0, 4), (1.0, 2.0, 0)):
        with pytest.raises(HarnessError):
            geometric_schedule(*bad)


def _config_dict(**over):
    d = {"experiment": "griffiths-1d",
         "graph": {"family": "path1d", "sizes": [200]},
         "dilution": {"mode": "site", "p": [0.6]},
         "lambda": [2.0],
         "replicates": 3,
         "seed": 11,
         "t_max": 20.0,
         "schedule": {"t0": 0.5, "ratio": 2.0, "count": 5},
         "constants": {"gamma2": 0.15}}
    d.update(over)
    return d


def test_config_round_trip_lossless():
    cfg = ExperimentConfig.from_dict(_config_dict())
    again = ExperimentConfig.from_json(cfg.to_json())
    assert again == cfg
    assert json.loads(cfg.to_json())["lambda"] == [2.0]


def test_config_rejects_unknown_keys():
    with pytest.raises(HarnessError, match="unknown config keys"):
        ExperimentConfig.from_dict(_config_dict(extra=1))
    with pytest.raises(HarnessError, match="unknown graph keys"):
        ExperimentConfig.from_dict(
            _config_dict(graph={"family": "path1d", "sizes": [10], "side": 3}))
    with pytest.raises(HarnessError, match="unknown dilution keys"):
        ExperimentConfig.from_dict(
            _config_dict(dilution={"mode": "site", "p": [0.5], "q": 1}))
    with pytest.raises(HarnessError, match="unknown schedule keys"):
        ExperimentConfig.from_dict(
            _config_dict(schedule={"t0": 1.0, "ratio": 2.0, "count": 3, "x": 1}))


def test_config_rejects_empty_lists_and_bad_values():
    with pytest.raises(HarnessError):
        ExperimentConfig.from_dict(
            _config_dict(graph={"family": "path1d", "sizes": []}))
    with pytest.raises(HarnessError):
        ExperimentConfig.from_dict(_config_dict(**{"lambda": []}))
    with pytest.raises(HarnessError):
        ExperimentConfig.from_dict(
            _config_dict(dilution={"mode": "site", "p": []}))
    with pytest.raises(HarnessError):
        ExperimentConfig.from_dict(_config_dict(replicates=0))
    with pytest.raises(HarnessError):
        ExperimentConfig.from_dict(
            _config_dict(schedule={"t0": 1.0, "ratio": 0.5, "count": 3}))


def test_run_experiment_unknown_name():
    cfg = ExperimentConfig.from_dict(_config_dict(experiment="nope"))
    with pytest.raises(HarnessError, match="unknown experiment"):
        run_experiment(cfg)


def test_griffiths_1d_outputs_and_reproducibility(tmp_path):
    cfg = ExperimentConfig.from_dict(_config_dict())
    d1, d2 = tmp_path / "a", tmp_path / "b"
    s1 = run_experiment(cfg, out_dir=str(d1))
    run_experiment(cfg, out_dir=str(d2))
    assert (d1 / "summary.json").exists()
    agg = (d1 / "aggregate.csv").read_text()
    assert agg.splitlines()[0] == "size,p,lambda,time,mean_density"
    assert agg == (d2 / "aggregate.csv").read_text()
    reps = sorted(d1.glob("replicate_*.csv"))
    assert len(reps) == 3
    assert reps[0].read_text().splitlines()[1] == "time,count"
    saved = json.loads((d1 / "summary.json").read_text())
    assert saved["schema_version"] == harness.SUMMARY_SCHEMA_VERSION
    assert saved["config"] == cfg.to_dict()
    assert s1["results"][0]["prediction"]["constants"]["exponent"] > 0


def test_griffiths_1d_worker_count_does_not_change_results(tmp_path):
    cfg = ExperimentConfig.from_dict(_config_dict())
    d1, d2 = tmp_path / "serial", tmp_path / "par"
    run_experiment(cfg, out_dir=str(d1))
    os.environ["CPDILUTE_WORKERS"] = "2"
    try:
        run_experiment(cfg, out_dir=str(d2))
    finally:
        del os.environ["CPDILUTE_WORKERS"]
    assert (d1 / "aggregate.csv").read_text() == (d2 / "aggregate.csv").read_text()


def test_griffiths_prediction_reports_missing_constants(tmp_path):
    cfg = ExperimentConfig.from_dict(_config_dict(constants={}))
    summary = run_experiment(cfg, out_dir=str(tmp_path))
    pred = summary["results"][0]["prediction"]
    assert "gamma2" in pred["error"]
    assert summary["results"][0]["ratio"] is None


def test_arrhenius_experiment(tmp_path):
    cfg = ExperimentConfig.from_dict(_config_dict(
        experiment="arrhenius",
        graph={"family": "path1d", "sizes": list(range(2, 9))}))
    summary = run_experiment(cfg, out_dir=str(tmp_path))
    assert summary["monotone"]
    assert summary["fitted_rate_A"] > 0
    assert summary["fit"]["r_squared"] > 0.95
    csv = (tmp_path / "oracle_mean_extinction.csv").read_text().splitlines()
    assert csv[0] == "size,lambda,exact_value"
    assert len(csv) == 8


def test_critical_line_er_experiment(tmp_path):
    cfg = ExperimentConfig.from_dict(_config_dict(
        experiment="critical-line-er",
        graph={"family": "erdos_renyi", "sizes": [100, 200, 400], "mu": 1.0},
        dilution={"mode": "bond", "p": [1.0]},
        replicates=5))
    summary = run_experiment(cfg, out_dir=str(tmp_path))
    assert summary["fit"]["slope"] > 0  # longer paths on larger graphs
    assert summary["prediction"]["constants"]["exponent"] == pytest.approx(1 / 3)
    assert (tmp_path / "path_lengths.csv").read_text().startswith(
        "size,replicate,path_length")


def test_supercrit_er_experiment(tmp_path):
    cfg = ExperimentConfig.from_dict(_config_dict(
        experiment="supercrit-er",
        graph={"family": "erdos_renyi", "sizes": [8, 12, 16], "mu": 3.0},
        dilution={"mode": "bond", "p": [0.8]},
        replicates=20, t_max=50.0,
        constants={"gamma2": 0.15, "eta_er": 0.5}))
    summary = run_experiment(cfg, out_dir=str(tmp_path))
    assert len(summary["medians"]) == 3
    assert "rate" in summary["prediction"]["constants"]
    assert (tmp_path / "extinction_times.csv").exists()


def test_phase_scan_experiment(tmp_path):
    cfg = ExperimentConfig.from_dict(_config_dict(
        experiment="phase-scan",
        graph={"family": "erdos_renyi", "sizes": [200], "mu": 3.0},
        dilution={"mode": "bond", "p": [0.2, 0.8]},
        replicates=2, t_max=30.0))
    summary = run_experiment(cfg, out_dir=str(tmp_path))
    assert len(summary["grid"]) == 2
    # heavier dilution cannot beat lighter dilution on mean survival proxy
    by_p = {p: u for p, lam, u in summary["grid"]}
    assert by_p[0.2] <= by_p[0.8]
    assert (tmp_path / "phase_grid.csv").read_text().splitlines()[0] == \
        "p,lambda,survival_proxy"


def test_oracle_check_all_pass():
    checks = oracle_check(reps=20000, seed=7)
    assert [name for name, ok, _ in checks if not ok] == []
    assert len(checks) == 7


def test_oracle_check_detects_corrupted_rates():
    checks = dict((name, ok) for name, ok, _ in
                  oracle_check(reps=5000, seed=7, lambda_injection=1.25))
    assert not checks["k2-sim-vs-oracle"]
    assert not checks["random-graphs-sim-vs-oracle"]
    assert checks["k2-oracle-closed-form"]
    assert checks["crossing-mc-vs-exact"]
