import csv
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from antipode.cli import main


@pytest.fixture
def run(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)

    def _run(*argv):
        code = main(list(argv))
        out, err = capsys.readouterr()
        return code, out, err

    return _run


def test_angle_gap(run, tmp_path):
    code, out, _ = run("angle", "gap", "2/7")
    assert code == 0
    # same values as 6/26 and 15/26, printed reduced
    assert json.loads(out) == {"a": "3/13", "b": "15/26", "length": "9/26"}
    side = json.loads((tmp_path / "antipode-angle.json").read_text())
    assert side["command"] == "angle" and side["result"]["length"] == "9/26"
    assert "version" in side and "config" in side


def test_angle_rho_inverse_and_balanced(run):
    assert json.loads(run("angle", "rho-inv", "1/3")[1])["theta"] == "2/7"
    assert json.loads(run("angle", "balanced", "1/3")[1])["theta"] == "2/7"
    assert json.loads(run("angle", "rho", "2/7")[1])["t"] == "1/3"
    assert json.loads(run("angle", "phi", "2/7", "1/3")[1])["x"] == "5/8"


def test_rho_graph_csv(run, tmp_path):
    code, _, _ = run("angle", "rho-graph", "--samples", "50", "--out", "rho.csv")
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "rho.csv")))
    assert rows[0] == ["theta", "t"] and len(rows) == 51
    ts = [Fraction(r[1]) for r in rows[1:]]
    assert ts == sorted(ts)


def test_rot_json(run):
    code, out, _ = run("rot", "--theta", "2/7")
    res = json.loads(out)
    assert code == 0 and res["d"] == 3 and res["rotation_number"] == "1/3"
    assert len(res["orbits"]) == 2
    assert json.loads(run("rot", "--t", "1/3")[1])["orbits"] == [["1/7", "2/7", "4/7"]]


def test_classify(run):
    assert json.loads(run("classify", "--q", "0.1")[1])["type"] == "Central"
    res = json.loads(run("classify", "--q", "3j", "--hue")[1])
    assert res["rotation_hue"] == 0.5


def test_ray_internal_csv(run, tmp_path):
    code, _, _ = run("ray", "internal", "--theta", "1/3", "--q", "0.5+0.3j", "--depth", "10", "--out", "r.csv")
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert len(rows) >= 11
    assert (tmp_path / "r.csv.json").exists()


def test_julia_render(run, tmp_path):
    code, _, _ = run("julia", "--q", "0.5j", "--size", "16", "--budget", "100", "--out", "j.ppm")
    assert code == 0
    assert (tmp_path / "j.ppm").read_bytes().startswith(b"P6\n16 16\n")
    assert json.loads((tmp_path / "j.ppm.json").read_text())["width"] == 16


def test_bad_input_exit_codes(run):
    code, out, err = run("angle", "gap", "x/y")
    assert code == 1 and json.loads(err)["error"] == "ValueError"
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_selftest_single_check(run):
    code, out, err = run("selftest", "--only", "1")
    assert code == 0 and json.loads(out)["ok"]
    assert err.startswith("PASS [1]")


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "antipode.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("antipode")
