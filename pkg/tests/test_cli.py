import json

import pytest

from catperc.beca import DEFAULT_TABLE_TEXT
from catperc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exact_from_file(tmp_path, capsys):
    path = tmp_path / "e.txt"
    path.write_text("4\n2 4\n")
    code, out, _ = run(capsys, "exact", "--edges", str(path), "--witness")
    assert code == 0
    data = json.loads(out)
    assert data["triangulable"] and data["triangles"] == [[1, 2, 4], [2, 3, 4]]


def test_exact_sampled_and_guard(capsys):
    code, out, _ = run(capsys, "exact", "--n", "40", "--p", "1", "--rule", "oriented")
    assert code == 0 and json.loads(out)["triangulable"]
    assert run(capsys, "exact", "--n", "4000", "--p", "0.5")[0] == 1
    assert run(capsys, "exact")[0] == 1


def test_gta_bta_geca(capsys):
    code, out, _ = run(capsys, "gta", "--n", "300", "--p", "0.9", "--seed", "2", "--triangles")
    data = json.loads(out)
    assert code == 0 and data["success"] and len(data["triangles"]) == 298
    code, out, _ = run(capsys, "bta", "--n", "300", "--p", "0.0")
    assert code == 0 and json.loads(out)["reason"] == "geca-failed"
    code, out, _ = run(capsys, "geca", "--n", "50", "--p", "1")
    assert json.loads(out)["tau"] == 3
    assert run(capsys, "gta", "--n", "10", "--p", "0.5")[0] == 1


def test_beca_commands(tmp_path, capsys):
    code, out, _ = run(capsys, "beca", "validate")
    assert code == 0 and json.loads(out)["passed"]
    bad = tmp_path / "bad.txt"
    bad.write_text("\n".join(DEFAULT_TABLE_TEXT.splitlines()[:-1]) + "\n")
    code, out, _ = run(capsys, "beca", "validate", "--table", str(bad))
    assert code == 2 and not json.loads(out)["passed"]
    code, out, _ = run(capsys, "beca", "run", "--n", "100", "--p", "0.8", "--seed", "1")
    assert code == 0 and "success" in json.loads(out)


def test_ruin_and_drift(capsys):
    code, out, _ = run(capsys, "ruin", "bounds", "--dist=-1:0.6,1:0.4", "--x", "1", "--J", "2")
    data = json.loads(out)
    assert code == 0 and data["lower"] == pytest.approx(0.4) and data["upper"] == pytest.approx(0.4)
    assert json.loads(run(capsys, "ruin", "pstar")[1])["p_star"] == pytest.approx(0.4916, abs=5e-4)
    assert json.loads(run(capsys, "ruin", "drift", "--p", "0.5")[1])["drift"] == -0.03125
    data = json.loads(run(capsys, "drift", "--p", "0.5")[1])
    assert data["coefficients"] == [1, 1, -9, 5, 4, -6, 2] and data["drift"] == -0.03125
    assert run(capsys, "ruin", "bounds", "--dist=-1:0.4,1:0.6", "--x", "1", "--J", "3")[0] == 1


def test_sweep_outputs(tmp_path, capsys):
    out_csv = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--algorithm", "gta", "--n", "200", "--p", "0.6,0.8",
                     "--trials", "5", "--out", str(out_csv), "--no-timing", "--threads", "2")
    lines = out_csv.read_text().splitlines()
    assert code == 0 and len(lines) == 3
    assert lines[0] == "algorithm,n,p,trials,successes,estimate,ci_low,ci_high,mean_runtime_ms,seed"
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"algorithm": "oracle", "n": 30, "p_grid": [1.0], "trials": 3}))
    code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--format", "json")
    assert code == 0 and json.loads(out)[0]["successes"] == 3


def test_usage_and_experiment_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--threads", "0", "--algorithm", "gta", "--n", "50", "--p", "0.5"])
    assert exc.value.code == 1
    code, _, err = run(capsys, "sweep", "--algorithm", "gta", "--n", "50", "--p", "0.5",
                       "--trials", "1", "--out", str(tmp_path / "no" / "x.csv"))
    assert code == 2 and "no" in err
    code, _, _ = run(capsys, "phalf", "--algorithm", "oracle", "--n", "40", "--trials", "20",
                     "--lo", "0.95", "--hi", "1.0")
    assert code == 2
