import json
import re
import subprocess
import sys

import pytest

from ising_corner.cli import dumps17, read_config, run


def run_json(args, capsys):
    status = run(args + ["--format", "json"])
    return status, json.loads(capsys.readouterr().out)


def test_free_energies_cross_method(capsys):
    status, out = run_json(["free-energies", "--k", "0.5", "--isotropic", "--method", "series,product,integral"], capsys)
    assert status == 0
    assert set(out) == {"version", "config", "results", "checks"}
    assert len(out["results"]) == 4
    assert out["checks"][0]["value"] < 1e-10


def test_exact_oracle_pair(capsys):
    status, out = run_json(["exact", "--M", "3", "--N", "3", "--H", "0.4", "--Hp", "0.3",
                            "--method", "enumeration,spinor"], capsys)
    assert status == 0
    a, b = (r["log_z"] for r in out["results"])
    assert abs(a - b) < 1e-10


def test_json_has_17_digits(capsys):
    run(["free-energies", "--k", "0.5", "--isotropic", "--format", "json"])
    text = capsys.readouterr().out
    m = re.search(r'"fb": ([-0-9.e+]+)', text)
    digits = re.sub(r"[^0-9]", "", m.group(1).split("e")[0]).lstrip("0")
    assert len(digits) == 17


def test_dumps17_roundtrip():
    x = 0.1
    assert float(json.loads(dumps17({"x": x}))["x"]) == x
    assert dumps17([float("nan")]).split() == ["[", "null", "]"]


@pytest.mark.parametrize("args", [
    ["free-energies", "--k", "0.5"],
    ["free-energies", "--k", "0.5", "--isotropic", "--H", "1", "--Hp", "1"],
    ["free-energies", "--k", "0.5", "--isotropic", "--method", "bogus"],
    ["free-energies", "--H", "0.2", "--Hp", "0.2"],
    ["verify", "--suite", "nope"],
    ["verify", "--tol", "unknown=1"],
    ["exact", "--H", "0.5", "--Hp", "0.5"],
    [],
])
def test_usage_errors(args, capsys):
    assert run(args) == 2


def test_resource_guard_exit(capsys):
    assert run(["exact", "--M", "3", "--N", "20", "--H", "0.5", "--Hp", "0.5", "--method", "transfer"]) == 3


def test_verify_failure_exit(capsys):
    assert run(["verify", "--suite", "forms", "--tol", "four_way=0"]) == 1
    assert run(["verify", "--suite", "forms"]) == 0


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\nk = 0.3\nisotropic = true\nmethod = series,product\nformat = csv\n")
    assert read_config(cfg)[:2] == ["--k", "0.3"]
    status, out = run_json(["free-energies", "--config", str(cfg), "--k", "0.5"], capsys)
    assert status == 0
    assert out["results"][0]["k"] == pytest.approx(0.5)
    assert [r["method"] for r in out["results"]] == ["series", "product"]


def test_csv_output(tmp_path):
    path = tmp_path / "out.csv"
    assert run(["free-energies", "--k", "0.5", "--isotropic", "--format", "csv", "--out", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0].split(",")[:3] == ["H", "Hp", "k"]
    assert len(lines) == 2


def test_sweep_order_independent_of_workers(monkeypatch, capsys):
    args = ["sweep", "--k", "0.3,0.6", "--v-imag", "0.4,0.6", "--format", "csv"]
    monkeypatch.setenv("ISING_CORNER_THREADS", "1")
    run(args)
    serial = capsys.readouterr().out
    monkeypatch.setenv("ISING_CORNER_THREADS", "3")
    run(args)
    assert capsys.readouterr().out == serial
    assert len(serial.splitlines()) == 5


def test_critical_command(capsys):
    status, out = run_json(["critical", "--which", "fc"], capsys)
    assert status == 0
    assert out["results"][0]["alpha_hat"] == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "ising_corner", "free-energies", "--k", "0.5", "--isotropic"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "series" in r.stdout
