import json
import os
import subprocess
import sys
from importlib import resources

import pytest

from spincm.cli import csv_header, run_command

SCENARIO = str(resources.files("spincm") / "scenarios" / "minimal_n2.json")


def write(tmp_path, doc, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def base_doc():
    with open(SCENARIO) as fh:
        return json.load(fh)


def test_header_format():
    assert csv_header(3) == ["t", "q_1", "q_2", "q_3", "p_1", "p_2", "p_3", "energy",
                             "lax_eig_1", "lax_eig_2", "lax_eig_3",
                             "spin_mod2_12", "spin_mod2_13", "spin_mod2_23"]
    assert csv_header(2, raw_spin=True)[-2:] == ["gauge_dependent_Z_re_12",
                                                 "gauge_dependent_Z_im_12"]


def test_simulate_bundled(tmp_path):
    assert run_command(["simulate", "--config", SCENARIO, "--out", str(tmp_path)]) == 0
    csv = (tmp_path / "trajectory_projection.csv").read_bytes()
    assert csv.splitlines()[0] == b"t,q_1,q_2,p_1,p_2,energy,lax_eig_1,lax_eig_2,spin_mod2_12"
    assert b"\r" not in csv
    report = json.loads((tmp_path / "report.json").read_text())
    assert set(report) >= {"scenario", "drifts", "engine_agreement", "status"}
    assert report["status"] == "ok"
    assert report["drifts"]["direct"]["spin_sign"] == 1
    assert all(v >= 0 for v in report["engine_agreement"].values())
    gp = (tmp_path / "trajectory.gp").read_text()
    assert "trajectory_projection.csv" in gp and "trajectory_direct.csv" in gp


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run_command(["simulate", "--config", SCENARIO, "--out", str(d)]) == 0
    for name in ("trajectory_projection.csv", "trajectory_direct.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_raw_spin_columns(tmp_path):
    assert run_command(["simulate", "--config", SCENARIO, "--out", str(tmp_path),
                        "--raw-spin"]) == 0
    header = (tmp_path / "trajectory_projection.csv").read_text().splitlines()[0]
    assert header.endswith("gauge_dependent_Z_re_12,gauge_dependent_Z_im_12")


def test_explicit_generator_and_spin(tmp_path):
    doc = base_doc()
    doc["system"] = {"n": 2, "orbit": {"generator": {"re": [[0, 0], [0, 0]],
                                                     "im": [[0, 1], [1, 0]]}}}
    doc["initial"]["spin"] = {"Z": {"re": [[0, 0], [0, 0]], "im": [[0, 1], [1, 0]]}}
    assert run_command(["simulate", "--config", write(tmp_path, doc),
                        "--out", str(tmp_path)]) == 0


@pytest.mark.parametrize("mutate, needle", [
    (lambda d: d["initial"].update(q=[-1.0, 1.0]), "strictly decreasing"),
    (lambda d: d["run"].update(speed=3), "unknown key"),
    (lambda d: d.update(extra={}), "unknown section"),
    (lambda d: d["run"].update(dt=-1), "run.dt"),
    (lambda d: d["run"].update(engine="euler"), "run.engine"),
    (lambda d: d["system"]["orbit"]["rank_one"].update(c=5.0), "tracelessness"),
    (lambda d: d["initial"].update(spin={"Z": {"re": [[0, 0], [0, 0]],
                                               "im": [[0, 3], [3, 0]]}}), "off the orbit"),
    (lambda d: d.pop("run"), "missing section"),
])
def test_config_errors(tmp_path, capsys, mutate, needle):
    doc = base_doc()
    mutate(doc)
    assert run_command(["simulate", "--config", write(tmp_path, doc)]) == 2
    assert needle in capsys.readouterr().err


def test_strict_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"system": {"n": NaN}}')
    assert run_command(["simulate", "--config", str(path)]) == 2
    path.write_text('{"run": {}, "run": {}}')
    assert run_command(["simulate", "--config", str(path)]) == 2
    path.write_text('{"system": // comment\n {}}')
    assert run_command(["simulate", "--config", str(path)]) == 2


def test_missing_file_is_io_error(tmp_path):
    assert run_command(["simulate", "--config", str(tmp_path / "nope.json")]) == 1


def test_bad_command():
    assert run_command(["fly", "--config", SCENARIO]) == 2


def test_wall_collision_is_numerical_failure(tmp_path):
    doc = base_doc()
    doc["system"]["orbit"] = {"rank_one": {"v": [1e-3, 1e-3]}}
    doc["initial"]["p"] = [-2.0, 2.0]
    assert run_command(["simulate", "--config", write(tmp_path, doc),
                        "--out", str(tmp_path)]) == 3


def test_tolerance_violation(tmp_path, monkeypatch):
    monkeypatch.setenv("SPINCM_TOL_SCALE", "1e-20")
    assert run_command(["simulate", "--config", SCENARIO, "--out", str(tmp_path)]) == 4
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["status"] == "tolerance_violation"


def test_bad_tol_scale(monkeypatch):
    monkeypatch.setenv("SPINCM_TOL_SCALE", "-1")
    assert run_command(["simulate", "--config", SCENARIO]) == 2


def test_verify_command(tmp_path):
    doc = {"verify": {"n": 3, "seed": 7, "samples": 30, "weinstein_pairs": 10,
                      "reduced_pairs": 9}}
    assert run_command(["verify", "--config", write(tmp_path, doc), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["results"]["weinstein_form"]["max_residual"] < 1e-6


def test_rmatrix_command(tmp_path, capsys):
    doc = {"rmatrix": {"n": [2, 3], "points": 4, "seed": 1}}
    assert run_command(["rmatrix", "--config", write(tmp_path, doc), "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "rational" in out and "trigonometric" in out
    table = json.loads((tmp_path / "rmatrix_report.json").read_text())["results"]["table"]
    assert len(table) == 4 and all(row["convention"] == "standard" for row in table)


def test_orbit_command(tmp_path):
    doc = base_doc()
    doc["system"] = {"n": 3, "orbit": {"rank_one": {"v": [1.0, 1.0, 1.0]}}}
    assert run_command(["orbit", "--config", write(tmp_path, doc), "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "orbit_report.json").read_text())["results"]
    assert res["dimension"] == 4
    assert res["minimal_collapse"]["max_modulus_deviation"] < 1e-8


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "spincm", "orbit", "--config", SCENARIO,
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert os.path.exists(tmp_path / "orbit_report.json")
