import json

import numpy as np
import pytest

from qgzeta import cli
from qgzeta.errors import NumericalError
from qgzeta.verify import CheckResult


def run_json(capsys, *argv):
    code = cli.main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_charpoly(capsys):
    code, doc = run_json(capsys, "charpoly", "k3_z2", "--k", "2.5", "--sigma", "0.9+0.1j", "--sigma", "1,-1")
    assert code == 0
    assert doc["command"] == "charpoly"
    assert len(doc["results"]["evaluations"]) == 2
    assert doc["residuals"]["worst"] <= 1e-8
    assert set(doc) >= {"inputs_echo", "results", "residuals", "timings"}


def test_cover_and_zeta(capsys):
    code, doc = run_json(capsys, "cover", "k3_s3", "--k", "1.7")
    assert code == 0 and doc["residuals"]["worst"] <= 1e-8
    assert [f["degree"] for f in doc["results"]["evaluations"][0]["factors"]] == [1, 1, 2]
    code, doc = run_json(capsys, "zeta", "theta_klein", "--k", "3", "--rep", "2")
    assert code == 0 and {r["rep"] for r in doc["results"]["evaluations"]} == {"chi2"}


def test_euler(capsys):
    code, doc = run_json(capsys, "euler", "k3_z2", "--k", "1.1", "--max-len", "6")
    assert code == 0 and len(doc["results"]["series"]) == 2
    assert doc["residuals"]["worst"] <= 1e-8


def test_spectrum_equilateral_k3(capsys):
    code, doc = run_json(capsys, "spectrum", "k3_z2", "--kmin", "0.1", "--kmax", "7")
    assert code == 0
    assert np.allclose(doc["results"]["roots"], [2 * np.pi / 3, 4 * np.pi / 3, 2 * np.pi], atol=1e-6)


def test_cycles_k3(capsys):
    code, doc = run_json(capsys, "cycles", "k3_z2", "--max-len", "3")
    assert code == 0
    assert doc["results"]["count"] == 5
    assert doc["results"]["by_length"] == {"2": 3, "3": 2}


def test_walk(capsys, tmp_path):
    out = tmp_path / "walk.json"
    code = cli.main(["walk", "k4", "--k", "2", "--steps", "3", "--walk", "PRIME", "--start", "e2^-1",
                     "--out", str(out)])
    assert code == 0 and capsys.readouterr().out == ""
    doc = json.loads(out.read_text())
    trace = doc["results"]["trace"]
    assert len(trace) == 4 and trace[0]["probabilities"][3] == 1.0
    assert doc["residuals"]["norm_drift"] <= 1e-12


def test_output_is_deterministic(capsys):
    argv = ["charpoly", "k4", "--k", "1.3", "--seed", "7"]
    _, a = run_json(capsys, *argv)
    _, b = run_json(capsys, *argv)
    assert a["results"] == b["results"]


def test_verify_passes(capsys):
    code, doc = run_json(capsys, "verify")
    assert code == 0 and doc["results"]["passed"]
    names = [c["name"] for c in doc["results"]["checks"]]
    assert sum(n[0].isdigit() for n in names) == 8


def test_verify_failure_names_identity(capsys, monkeypatch):
    bad = CheckResult("2 charpoly reduction", False, 3e-5, 1e-8)
    monkeypatch.setattr(cli, "run_acceptance", lambda seed: [bad])
    code, doc = run_json(capsys, "verify", "k4")
    assert code == 1
    assert doc["results"]["failed"] == ["2 charpoly reduction"]
    assert doc["residuals"]["2 charpoly reduction"] == 3e-5


@pytest.mark.parametrize("argv, field", [
    (["charpoly", "k3_z2"], None),
    (["charpoly", "k3_z2", "--k", "abc"], None),
    (["charpoly", "no_such_graph", "--k", "1"], None),
    (["zeta", "k4", "--k", "1"], "group"),
    (["zeta", "k3_z2", "--k", "1", "--rep", "chi9"], "--rep"),
    (["walk", "k4", "--k", "1", "--start", "zz"], "--start"),
    (["cycles", "k3_z2", "--max-len", "20"], None),
])
def test_input_errors(capsys, argv, field):
    code, doc = run_json(capsys, *argv)
    assert code == 2
    assert doc["error"]["message"]
    assert doc["error"]["field"] == field


def test_malformed_file_reports_field(capsys, tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"vertices": ["a", "b"], "edges": [{"from": "a", "to": "b"}]}))
    code, doc = run_json(capsys, "charpoly", str(p), "--k", "1")
    assert code == 2
    assert doc["error"]["field"] == "edges[0].length"
    assert doc["error"]["source"] == str(p)


def test_numerical_failure_exit_code(capsys, monkeypatch):
    def boom(job):
        raise NumericalError("did not converge")

    monkeypatch.setitem(cli.HANDLERS, "spectrum", boom)
    code, doc = run_json(capsys, "spectrum", "k3_z2", "--kmin", "1", "--kmax", "2")
    assert code == 3 and doc["error"]["type"] == "NumericalError"
