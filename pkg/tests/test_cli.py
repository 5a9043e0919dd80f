import json
import math
import subprocess
import sys

import pytest

from hallstokes.cli import main, parse_complex_list


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_semistables_example(capsys):
    js = run_json(capsys, "semistables", "--quiver", "A2", "--Z", "[-1,1],[1,1]", "--gamma", "1,1")
    assert js["semistables"] == [[[1, 2]]]
    assert js["meta"]["seed"] == 0 and js["meta"]["truncation"] == 4


def test_jn_eval_example(capsys):
    js = run_json(capsys, "jn-eval", "--n", "1", "--z", "1+0i")
    assert js["value"] == pytest.approx([0.0, -1 / (2 * math.pi)], abs=1e-15)
    assert js["error"] == 0.0 and js["on_cut"] is False


def test_empty_support(capsys):
    js = run_json(capsys, "semistables", "--Z", "[-1,1],[1,1]", "--gamma", "0,0")
    assert js["semistables"] == []
    js = run_json(capsys, "delta", "--Z", "[1,1],[-1,1]", "--gamma", "1,1")
    assert js["result"] == {"class-graded": {}}


def test_exact_Z_and_wall(capsys):
    js = run_json(capsys, "epsilon", "--Z-exact", "i,2i", "--gamma", "1,1")
    assert js["result"]["class-graded"]["1,1"] == [[[[1, 2]], "1/2"]]


def test_hn(capsys):
    js = run_json(capsys, "hn", "--Z", "[-1,1],[1,1]", "--module", "[[1,1],[2,2]]")
    assert js["hn_classes"] == [[1, 0], [0, 1]]


def test_hall_product(capsys):
    js = run_json(capsys, "hall-product", "--factor", "indicator:[[2,2]]",
                  "--factor", "indicator:[[1,1]]")
    terms = dict((json.dumps(m), c) for m, c in js["result"]["class-graded"]["1,1"])
    assert terms[json.dumps([[1, 2]])] == "1"


def test_kappa_and_delta_agree_with_reineke(capsys):
    k = run_json(capsys, "kappa", "--gamma", "1,0")
    d = run_json(capsys, "delta", "--Z", "[-1,1],[1,1]", "--gamma", "1,0")
    assert k["result"] == d["result"]


def test_stokes_round_trip(capsys, tmp_path):
    fwd = run_json(capsys, "stokes-forward", "--Z", "[-1,1],[1,1]", "--d", "3", "--seed", "4")
    path = tmp_path / "eps.json"
    path.write_text(json.dumps(fwd["epsilon"]))
    for route in ("series", "j"):
        inv = run_json(capsys, "stokes-inverse", "--Z", "[-1,1],[1,1]", "--d", "3",
                       "--coeffs", str(path), "--route", route)
        a, b = fwd["input"], inv["f"]
        assert a.keys() == b.keys()
    assert fwd["provenance"]


def test_ode_extract(capsys):
    js = run_json(capsys, "ode-extract", "--Z", "[-1,1],[1,1]", "--d", "2", "--from-stability",
                  "--multipliers", "--phase", "0")
    assert js["S_plus"] and js["S_minus"]
    js = run_json(capsys, "ode-extract", "--Z", "[-1,1],[1,1]", "--d", "2", "--phase", "0.5")
    assert js["leakage"] < 1e-8


def test_isomonodromy_check(capsys):
    js = run_json(capsys, "isomonodromy-check", "--Z", "[-0.6,0.9],[0.8,0.5]", "--d", "3")
    assert js["max_residual"] < 1e-5 and js["meta"]["h"] == 1e-4


def test_wallcross_csv(capsys, tmp_path):
    out = tmp_path / "samples.csv"
    js = run_json(capsys, "wallcross", "--Z", "[0,1],[0,1]", "--d", "2", "--direction=-1,1",
                  "--samples", "4", "--csv", str(out))
    assert js["report"]["order"] >= 0.9
    assert out.read_text().startswith("s,label,re,im")


def test_config_overrides(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"Z": "[1,1],[-1,1]", "gamma": "1,1"}))
    js = run_json(capsys, "semistables", "--Z", "[-1,1],[1,1]", "--gamma", "1,0",
                  "--config", str(cfg))
    assert js["semistables"] == []


@pytest.mark.parametrize("argv", [
    ["semistables", "--gamma", "1,1"],
    ["semistables", "--Z", "[1,-1],[1,1]", "--gamma", "1,1"],
    ["semistables", "--Z", "[-1,1]", "--gamma", "1,1"],
    ["hn", "--Z", "[-1,1],[1,1]", "--module", "[[3,1]]"],
    ["jn-eval", "--n", "2", "--z", "1+1i"],
    ["nonsense"],
    ["delta", "--quiver", "B2", "--Z", "[-1,1],[1,1]", "--gamma", "1,1"],
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"frobnicate": 1}))
    code, _, err = run(capsys, "kappa", "--gamma", "1,1", "--config", str(cfg))
    assert code == 2 and "frobnicate" in err


def test_numerical_failure_is_exit_one(capsys):
    code, out, _ = run(capsys, "isomonodromy-check", "--Z", "[0,1],[0.0001,1]", "--d", "2")
    assert code == 1
    js = json.loads(out)
    assert js["error"] == "WallProximityError" and js["command"] == "isomonodromy-check"


def test_byte_identical_reruns(capsys, monkeypatch):
    argv = ["stokes-forward", "--Z", "[-1,1],[1,1]", "--d", "3", "--seed", "9"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    argv = ["isomonodromy-check", "--random", "2", "--d", "2", "--seed", "3"]
    _, c, _ = run(capsys, *argv)
    monkeypatch.setenv("HALLSTOKES_THREADS", "2")
    _, d, _ = run(capsys, *argv)
    assert c == d


def test_bad_thread_count(capsys, monkeypatch):
    monkeypatch.setenv("HALLSTOKES_THREADS", "zero")
    code, _, _ = run(capsys, "kappa", "--gamma", "1,1")
    assert code == 2


def test_parse_complex_list_forms():
    assert parse_complex_list("[-1,1],[1,1]") == [-1 + 1j, 1 + 1j]
    assert parse_complex_list("1+1i,2-1i") == [1 + 1j, 2 - 1j]
    assert parse_complex_list([[0, 1]]) == [1j]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hallstokes.cli", "kappa", "--gamma", "1,0"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["class-graded"]["1,0"] == [[[[1, 1]], "1"]]


def test_ode_extract_all_rays(capsys, tmp_path):
    zfile = tmp_path / "z.json"
    zfile.write_text(json.dumps([[-1, 1], [1, 1]]))
    fwd = run_json(capsys, "stokes-forward", "--Z", str(zfile), "--d", "2", "--seed", "1")
    ffile = tmp_path / "f.json"
    ffile.write_text(json.dumps(fwd["input"]))
    js = run_json(capsys, "ode-extract", "--Z", str(zfile), "--d", "2", "--f", str(ffile))
    assert [r["phase"] for r in js["rays"]] == pytest.approx([0.75, 0.5, 0.25])
    assert js["S_plus_check"] < 1e-6 and js["leakage"] < 1e-8
    one = run_json(capsys, "ode-extract", "--Z", str(zfile), "--d", "2", "--f", str(ffile),
                   "--ray-phase", "0.5")
    assert one["leakage"] < 1e-8


def test_jn_eval_on_cut_and_arc(capsys):
    a = run_json(capsys, "jn-eval", "--n", "2", "--z", "1i,1i", "--function", "L")
    b = run_json(capsys, "jn-eval", "--n", "2", "--z", "1i,1i", "--function", "L", "--arc-eps", "0.01")
    assert a["on_cut"] and b["on_cut"]
    assert a["value"] == pytest.approx(b["value"], abs=1e-9)
    run_json(capsys, "jn-eval", "--n", "1", "--z", "1i")
    code, _, _ = run(capsys, "jn-eval", "--n", "1", "--z", "1i", "--arc-eps", "2")
    assert code == 2


def test_chamber_csv(capsys, tmp_path):
    out = tmp_path / "chamber.csv"
    run_json(capsys, "semistables", "--Z-exact", "i,2i", "--gamma", "1,1", "--d", "2",
             "--chamber-csv", str(out))
    lines = out.read_text().splitlines()
    assert lines[0].startswith("Z,signature") and len(lines) == 2
