import json
import shutil
import subprocess
import sys

import jsonschema
import pytest

from dmlneuron.cli import main
from dmlneuron.files import load_schema, read_table, sha256


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _json(path):
    return json.loads(path.read_text())


def _valid(path, schema):
    jsonschema.validate(_json(path), load_schema(schema))


def test_console_script_version():
    r = subprocess.run([sys.executable, "-m", "dmlneuron.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.strip()


def test_unknown_subcommand_is_usage_error(capsys, tmp_path):
    code, _, err = _run(capsys, "frobnicate", "--out", str(tmp_path))
    assert code == 1
    assert "error" in err


def test_invalid_gamma_names_flag(capsys, tmp_path):
    code, _, err = _run(capsys, "equilibria", "--gamma", "-0.2", "--out", str(tmp_path))
    assert code == 1
    assert "--gamma" in err


def test_missing_input_file(capsys, tmp_path):
    code, _, err = _run(capsys, "classify", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path))
    assert code == 1
    assert "nope.csv" in err


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numerical_failure_exit_code(capsys, tmp_path):
    code, _, err = _run(capsys, "simulate", "--scenario", "fig4a", "--periods", "10",
                        "--ic", "1e200", "0", "0", "--out", str(tmp_path))
    assert code == 2
    assert "numerical failure" in err


def test_out_directory_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("DMLNEURON_OUT", str(tmp_path / "env"))
    assert _run(capsys, "cusp")[0] == 0
    assert (tmp_path / "env" / "cusp.json").is_file()


def test_scenario_list(capsys, tmp_path):
    code, out, _ = _run(capsys, "scenario", "list", "--out", str(tmp_path))
    assert code == 0
    assert len(out.strip().splitlines()) == 11
    _valid(tmp_path / "scenario-list.json", "scenarios")
    _valid(tmp_path / "scenario-list.manifest.json", "manifest")


def test_equilibria_prints_array(capsys, tmp_path):
    code, out, _ = _run(capsys, "equilibria", "--gamma", "0.2", "--I", "0", "--out", str(tmp_path))
    assert code == 0
    arr = json.loads(out)
    assert isinstance(arr, list) and len(arr) == 1
    assert arr[0]["stability"] in ("stable-node", "stable-focus")
    _valid(tmp_path / "equilibria.json", "equilibria")


def test_nullclines_outputs(capsys, tmp_path):
    code, _, _ = _run(capsys, "nullclines", "--gamma", "0.2", "--svg", "--out", str(tmp_path))
    assert code == 0
    tab = read_table(tmp_path / "nullclines.csv")
    assert list(tab) == ["x", "y_x_nullcline", "y_y_nullcline"]
    _valid(tmp_path / "nullclines.equilibria.json", "nullclines")
    assert (tmp_path / "nullclines.svg").is_file()
    man = _json(tmp_path / "nullclines.manifest.json")
    assert {o["path"] for o in man["outputs"]} == {"nullclines.csv", "nullclines.equilibria.json", "nullclines.svg"}
    assert "--out" not in man["argv"]


def test_continue_reports_bifurcations(capsys, tmp_path):
    code, _, _ = _run(capsys, "continue", "--gamma", "0.28", "--I", "-0.05", "--from", "-0.05", "--to", "0.1",
                      "--out", str(tmp_path))
    assert code == 0
    _valid(tmp_path / "continue.bifurcations.json", "bifurcations")
    kinds = sorted(b["kind"] for b in _json(tmp_path / "continue.bifurcations.json")["bifurcations"])
    assert kinds == ["fold", "fold", "hopf", "neutral_saddle"]
    tab = read_table(tmp_path / "continue.csv")
    assert tab["param"][0] == -0.05


def test_codim2_curves(capsys, tmp_path):
    code, _, _ = _run(capsys, "codim2", "--n", "200", "--out", str(tmp_path))
    assert code == 0
    for name in ("codim2.fold.csv", "codim2.hopf.csv"):
        assert list(read_table(tmp_path / name)) == ["x", "I", "gamma", "genuine"]
    _valid(tmp_path / "codim2.points.json", "points")
    kinds = [p["kind"] for p in _json(tmp_path / "codim2.points.json")["points"]]
    assert kinds.count("cusp") == 1 and kinds.count("generalized_hopf") == 2


def test_gh_reports_sign_change(capsys, tmp_path):
    assert _run(capsys, "gh", "--out", str(tmp_path))[0] == 0
    _valid(tmp_path / "gh.json", "points")
    for p in _json(tmp_path / "gh.json")["points"]:
        assert p["l1_left"] * p["l1_right"] < 0


def test_regions_single_point(capsys, tmp_path):
    code, _, _ = _run(capsys, "regions", "--I", "0", "--gamma", "0.2", "--out", str(tmp_path))
    assert code == 0
    _valid(tmp_path / "regions.json", "region")
    assert _json(tmp_path / "regions.json")["region"] == "R1"


def test_simulate_then_classify(capsys, tmp_path):
    code, _, _ = _run(capsys, "simulate", "--scenario", "fig4a", "--periods", "10", "--transient", "0.2",
                      "--out", str(tmp_path))
    assert code == 0
    assert list(read_table(tmp_path / "simulate.csv")) == ["t", "x", "y", "phi"]
    _valid(tmp_path / "simulate.json", "simulation")
    code, out, _ = _run(capsys, "classify", "--input", str(tmp_path / "simulate.csv"), "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["kind"] == "rest"
    _valid(tmp_path / "classify.json", "regime")


def test_classify_needs_one_source(capsys, tmp_path):
    assert _run(capsys, "classify", "--out", str(tmp_path))[0] == 1


def test_sweep_rows_in_input_order(capsys, tmp_path):
    code, _, _ = _run(capsys, "sweep", "--scenario", "fig4a", "--periods", "10", "--transient", "0.2",
                      "--param", "I0", "--values", "0.0155", "0.00072", "--out", str(tmp_path))
    assert code == 0
    tab = read_table(tmp_path / "sweep.csv")
    assert list(tab["index"]) == [0, 1]
    assert list(tab["I0"]) == [0.0155, 0.00072]
    assert tab["kind"][1] == "rest"


def test_sweep_rejects_unknown_param(capsys, tmp_path):
    code, _, err = _run(capsys, "sweep", "--scenario", "fig4a", "--param", "zeta", "--values", "1",
                        "--out", str(tmp_path))
    assert code == 1 and "zeta" in err


def test_rerun_is_byte_identical(capsys, tmp_path):
    first = tmp_path / "a"
    assert _run(capsys, "nullclines", "--gamma", "0.28", "--svg", "--out", str(first))[0] == 0
    assert _run(capsys, "continue", "--gamma", "0.28", "--I", "-0.05", "--from", "-0.05", "--to", "0.1",
                "--envelope", "3", "--cycle-horizon", "500", "--svg", "--out", str(first))[0] == 0
    for stem in ("nullclines", "continue"):
        second = tmp_path / f"b-{stem}"
        code, out, _ = _run(capsys, "rerun", str(first / f"{stem}.manifest.json"), "--out", str(second))
        assert code == 0, out
        for o in _json(first / f"{stem}.manifest.json")["outputs"]:
            assert (second / o["path"]).read_bytes() == (first / o["path"]).read_bytes()


def test_rerun_detects_tampering(capsys, tmp_path):
    assert _run(capsys, "cusp", "--out", str(tmp_path))[0] == 0
    man_path = tmp_path / "cusp.manifest.json"
    man = _json(man_path)
    man["outputs"][0]["sha256"] = "0" * 64
    man_path.write_text(json.dumps(man))
    code, _, err = _run(capsys, "rerun", str(man_path))
    assert code == 2
    assert "differ" in err


def test_render_from_csv(capsys, tmp_path):
    assert _run(capsys, "nullclines", "--gamma", "0.2", "--out", str(tmp_path))[0] == 0
    code, _, _ = _run(capsys, "render", "nullclines", str(tmp_path / "nullclines.csv"),
                      "--points", str(tmp_path / "nullclines.equilibria.json"), "--out", str(tmp_path))
    assert code == 0
    shutil.copy(tmp_path / "render.svg", tmp_path / "first.svg")
    assert _run(capsys, "render", "nullclines", str(tmp_path / "nullclines.csv"),
                "--points", str(tmp_path / "nullclines.equilibria.json"), "--out", str(tmp_path))[0] == 0
    assert sha256(tmp_path / "render.svg") == sha256(tmp_path / "first.svg")
