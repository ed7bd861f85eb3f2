import json

import pytest

from catperc.edges import mix64
from catperc.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    ExperimentError,
    TrialSummary,
    emit,
    estimate_p_half,
    paired_outcomes,
    read_csv,
    run_trials,
    trial_seed,
    wilson,
)


def test_trial_seed():
    assert trial_seed(7, 3) == mix64(10)


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig("nope", 10, (0.5,), 1)
    with pytest.raises(ValueError):
        ExperimentConfig("gta", 100, (0.5,), 0)
    with pytest.raises(ValueError):
        ExperimentConfig("gta", 100, (1.5,), 1)
    with pytest.raises(ValueError):
        ExperimentConfig("oracle", 3001, (0.5,), 1)
    assert ExperimentConfig("oracle", 3001, (0.5,), 1, allow_large_oracle=True).n == 3001
    cfg = ExperimentConfig("bta", 64, [0.5, 0.7], 3, 9, beta=0.5)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.from_file(path) == cfg
    path.write_text('{"algorithm": "gta", "n": 50, "p_grid": 0.6, "trials": 2, "bogus": 1}')
    with pytest.raises(ValueError):
        ExperimentConfig.from_file(path)


@pytest.mark.parametrize("alg", ["oracle", "oriented-oracle", "gta", "bta", "geca"])
def test_extremes(alg):
    res = run_trials(ExperimentConfig(alg, 64, (0.0, 1.0), 5))
    assert [r.successes for r in res] == [0, 5]


def test_summary_invariants():
    for r in run_trials(ExperimentConfig("gta", 300, (0.5, 0.6, 0.7), 30, 4)):
        assert 0 <= r.successes <= r.trials
        assert r.ci_low <= r.estimate <= r.ci_high
        assert 0.0 <= r.ci_low and r.ci_high <= 1.0
        assert r.mean_runtime_ms is not None and r.mean_runtime_ms > 0
    assert wilson(0, 10)[0] == 0.0 and wilson(10, 10)[1] == 1.0


def test_oracle_monotone_coupling():
    lo, hi = run_trials(ExperimentConfig("oracle", 200, (0.35, 0.45), 100, 1))
    assert hi.estimate >= lo.estimate


def test_paired_dominance():
    out = paired_outcomes(("oracle", "bta", "gta"), 400, 0.55, 60, 3)
    for o, b, g in zip(out["oracle"], out["bta"], out["gta"]):
        assert o or not (b or g)


def test_determinism_across_threads():
    cfg = ExperimentConfig("gta", 500, (0.55, 0.65), 12, 5, timing=False)
    a = emit(run_trials(cfg, threads=1))
    b = emit(run_trials(cfg, threads=3))
    assert a == b
    assert emit(run_trials(cfg, threads=2), "json") == emit(run_trials(cfg), "json")


def test_emit_formats(tmp_path):
    assert emit([]) == ",".join(CSV_COLUMNS) + "\n"
    r = TrialSummary("gta", 10, 0.5, 4, 2, 0.5, 0.15, 0.85, 1.25, 7, 3.0)
    text = emit([r], "json", tmp_path / "out.json")
    row = json.loads((tmp_path / "out.json").read_text())[0]
    assert text.endswith("\n") and list(row)[:10] == list(CSV_COLUMNS)
    assert row == r.to_json()
    rows = read_csv(emit([r], "csv"))
    assert rows[0]["estimate"] == "0.5" and rows[0]["seed"] == "7"
    none = TrialSummary("gta", 10, 0.5, 4, 2, 0.5, 0.15, 0.85, None, 7)
    assert read_csv(emit([none]))[0]["mean_runtime_ms"] == ""
    with pytest.raises(ExperimentError):
        emit([r], "csv", tmp_path / "missing" / "x.csv")
    with pytest.raises(ValueError):
        emit([r], "xml")


def test_p_half_small_oracle():
    est = estimate_p_half("oracle", 100, 80, 0.02, master_seed=3)
    assert est.ci_low <= est.p_hat <= est.ci_high
    assert est.ci_high - est.ci_low <= 0.02 + 1e-12
    assert 0.3 < est.p_hat < 0.5
    with pytest.raises(ValueError):
        estimate_p_half("oracle", 100, 80, 0.001)


def test_p_half_gives_up_on_impossible_bracket():
    # the crossing is far outside [0.9, 1.0]
    with pytest.raises(ExperimentError):
        estimate_p_half("oracle", 60, 30, 0.01, bracket=(0.9, 1.0), attempts=2)


@pytest.mark.slow
def test_p_half_gta_near_half_and_bta_below():
    g = estimate_p_half("gta", 20_000, 100, 0.02, master_seed=11)
    b = estimate_p_half("bta", 20_000, 100, 0.02, master_seed=11)
    assert 0.45 < g.p_hat < 0.6
    assert b.p_hat < g.p_hat
