import json
import subprocess
import sys

import pytest

from retfront.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, EXIT_UNKNOWN, main


def run(tmp_path, *argv):
    code = main(["--out", str(tmp_path), *argv])
    return code


def load(path):
    return json.loads(path.read_text())


# ------------------------------------------------------------ determinacy


def test_determinacy_x3(tmp_path, capsys):
    assert run(tmp_path, "determinacy", "x^3", "--r", "1", "--k", "0") == EXIT_OK
    js = load(tmp_path / "determinacy.json")
    assert js["order"] == 3 and js["status"] == "determined_at_most"
    assert "truncation" in js
    assert json.loads(capsys.readouterr().out) == js


def test_determinacy_d4(tmp_path):
    assert run(tmp_path, "determinacy", "y1^2*y2 - y2^3", "--r", "0", "--k", "2") == EXIT_OK
    assert load(tmp_path / "determinacy.json")["order"] == 3


def test_determinacy_zero_is_input_error(tmp_path, capsys):
    assert run(tmp_path, "determinacy", "0") == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_determinacy_unknown(tmp_path):
    assert run(tmp_path, "determinacy", "y1^3", "--r", "0", "--k", "2", "--l-max", "5") \
        == EXIT_UNKNOWN
    assert load(tmp_path / "determinacy.json")["status"] != "determined_at_most"


@pytest.mark.parametrize("text", ["x^^3", "x +", "w^2", "x^(3", "", "1/0*x"])
def test_malformed_polynomials_never_crash(tmp_path, text):
    assert run(tmp_path, "determinacy", text) == EXIT_INPUT


def test_bad_arguments(tmp_path):
    assert run(tmp_path, "frobnicate") == EXIT_INPUT
    assert run(tmp_path, "determinacy", "x^3", "--r", "two") == EXIT_INPUT


# ---------------------------------------------------------------- classify


def test_classify_c3_plus(tmp_path):
    assert run(tmp_path, "classify", "x*y + y^3", "--r", "1", "--k", "1") == EXIT_OK
    js = load(tmp_path / "classify.json")
    assert js["family"] == "C3" and js["sign"] == "+"


def test_classify_d6_is_inconclusive(tmp_path):
    code = run(tmp_path, "classify", "y1^2*y2 + y2^5", "--r", "0", "--k", "2")
    assert code == EXIT_UNKNOWN
    assert set(load(tmp_path / "classify.json")["candidates"]) == {"D6+", "D6-"}


# --------------------------------------------------------------- stability


@pytest.mark.parametrize("label", ["1B3", "1F4"])
def test_check_stability_labels(tmp_path, label):
    assert run(tmp_path, "check-stability", "--label", label) == EXIT_OK
    js = load(tmp_path / "stability.json")
    assert js["stable"] is True and js["versal"] is True and js["label"] == label
    assert js["truncation"] >= 2


def test_check_stability_unstable_family(tmp_path):
    assert run(tmp_path, "check-stability", "x^3+q1*x+z", "--n", "2") == EXIT_OK
    js = load(tmp_path / "stability.json")
    assert js["stable"] is False and "x^2" in js["cobasis"]


def test_check_stability_signed_label(tmp_path):
    assert run(tmp_path, "check-stability", "--label", "0C3", "--signs", "-") == EXIT_OK
    assert load(tmp_path / "stability.json")["stable"] is True


@pytest.mark.parametrize("argv", [
    ["check-stability"],
    ["check-stability", "--label", "9Q9"],
    ["check-stability", "x^3 + t*x^2"],
    ["check-stability", "1 + x^3 + q1*x + z"],
    ["check-stability", "--label", "0C3", "--signs", "?"],
])
def test_check_stability_input_errors(tmp_path, argv):
    assert run(tmp_path, *argv) == EXIT_INPUT


# ---------------------------------------------------------- verify-catalog


def test_verify_catalog_subset(tmp_path, capsys):
    assert run(tmp_path, "verify-catalog", "--r", "1", "--n", "1") == EXIT_OK
    out = capsys.readouterr().out
    assert "4/4 entries passed" in out
    assert load(tmp_path / "catalog_verification.json")["all_passed"] is True
    assert len(load(tmp_path / "catalog.json")) >= 3


# --------------------------------------------------------------- wavefront


def test_wavefront_b3_svgs(tmp_path):
    assert run(tmp_path, "wavefront", "--label", "1B3", "--t", "-1,0,1", "--format", "svg",
               "--grid", "41") == EXIT_OK
    svgs = sorted(p.name for p in tmp_path.glob("*.svg"))
    assert len(svgs) == 9
    assert sum("overlay" in n for n in svgs) == 3
    js = load(tmp_path / "1B3_summary.json")
    cusps = {(tuple(s["sigma"]), s["t"]): s["interior_cusps"] for s in js["sheets"]}
    assert cusps[((), -1)] == 1 and cusps[((), 1)] == 0


def test_wavefront_c3_minus_three_dimensional(tmp_path):
    assert run(tmp_path, "wavefront", "--label", "0C3-", "--t", "0", "--grid", "21") == EXIT_OK
    objs = sorted(p.name for p in tmp_path.glob("*.obj"))
    assert len(objs) == 3 and not list(tmp_path.glob("*.svg"))


def test_wavefront_c4_objs(tmp_path):
    assert run(tmp_path, "wavefront", "--label", "1C4", "--t", "-1,0,1", "--format", "obj",
               "--grid", "21") == EXIT_OK
    assert len([p for p in tmp_path.glob("*.obj") if "overlay" not in p.name]) == 6


def test_wavefront_json_and_window(tmp_path):
    assert run(tmp_path, "wavefront", "--label", "0B2", "--t-values", "0", "--format", "json",
               "--window", "0.5", "--grid", "21") == EXIT_OK
    dumps = [sh for p in tmp_path.glob("0B2_sigma*.json") for sh in load(p)["sheets"]]
    assert len(dumps) == 2
    assert all({"sigma", "t", "vertices", "markers"} <= set(d) for d in dumps)


def test_wavefront_from_polynomial(tmp_path):
    assert run(tmp_path, "wavefront", "x^3 + t*x^2 + q1*x + z", "--t", "-1", "--grid", "41") \
        == EXIT_OK
    assert (tmp_path / "family_summary.json").exists()


@pytest.mark.parametrize("argv", [
    ["wavefront", "--label", "1B3", "--t", "a,b"],
    ["wavefront", "--label", "1B3", "--t", ""],
    ["wavefront", "--label", "1C4", "--format", "svg", "--grid", "11"],
])
def test_wavefront_input_errors(tmp_path, argv):
    assert run(tmp_path, *argv) == EXIT_INPUT


def _snapshot(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_wavefront_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(d, "wavefront", "--label", "1C3+", "--t", "-1,0,1", "--grid", "21") == EXIT_OK
    assert _snapshot(a) == _snapshot(b)


# --------------------------------------------------------------- propagate


def test_propagate_segment(tmp_path):
    assert run(tmp_path, "propagate", "--shape", "segment-with-endpoint", "--t", "0.5",
               "--dt", "1e-2", "--samples", "51") == EXIT_OK
    svgs = list(tmp_path.glob("*.svg"))
    assert len(svgs) >= 2
    js = load(tmp_path / "segment-with-endpoint_propagation.json")
    assert js["max_H_drift"] < 1e-8


def test_propagate_diag_metric_and_json_front(tmp_path):
    front = tmp_path / "front.json"
    front.write_text(json.dumps({"name": "line", "r": 0, "k": 1, "dim": 2,
                                 "axes": [[0, 0.5, 1]], "points": [[0, 0], [0.5, 0], [1, 0]]}))
    assert run(tmp_path / "o", "propagate", "--front-json", str(front), "--metric", "diag:1,4",
               "--t", "0.2,0.4", "--dt", "1e-2") == EXIT_OK
    assert load(tmp_path / "o" / "line_propagation.json")["metric"]


@pytest.mark.parametrize("argv", [
    ["propagate", "--metric", "riemann"],
    ["propagate", "--metric", "diag:1"],
    ["propagate", "--metric", "diag:1,-1"],
    ["propagate", "--t", "-0.5"],
    ["propagate", "--front-json", "/nonexistent/front.json"],
])
def test_propagate_input_errors(tmp_path, argv):
    assert run(tmp_path, *argv) == EXIT_INPUT


# ------------------------------------------------------------- verify-lift


@pytest.mark.parametrize("family", ["identity", "translation", "scaling"])
def test_verify_lift(tmp_path, family):
    assert run(tmp_path, "verify-lift", "--family", family) == EXIT_OK
    js = load(tmp_path / f"lift_{family}.json")
    assert js["passed"] and js["max_residual"] < 1e-6


def test_verify_lift_failure_code(tmp_path):
    assert run(tmp_path, "verify-lift", "--family", "scaling", "--tol", "1e-30") == EXIT_FAILED


# -------------------------------------------------------------- entry point


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "retfront.cli", "--out", str(tmp_path),
                           "determinacy", "x^4"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["order"] == 4
