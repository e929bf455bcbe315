import csv
import io
import json

import pytest

from hls_lab.cli import main


def run(capsys, *args):
    code = main(list(args))
    return code, capsys.readouterr()


def test_constants_json(capsys):
    code, out = run(capsys, "constants", "--n", "3", "--s", "1")
    assert code == 0
    rep = json.loads(out.out)
    assert set(rep) == {"meta", "records", "summary"}
    assert rep["summary"]["S"] == pytest.approx(5.4784, rel=1e-4)
    for key in ("n", "s", "L", "m", "seed", "version", "tolerances"):
        assert key in rep["meta"]


def test_constants_invalid_params(capsys):
    code, out = run(capsys, "constants", "--n", "3", "--s", "1.5")
    assert code == 2
    assert "invalid" in out.err


def test_unknown_flag_is_invalid(capsys):
    code, _ = run(capsys, "constants", "--bogus")
    assert code == 2


def test_bad_slack_is_invalid(capsys):
    code, _ = run(capsys, "constants", "--slack", "25")
    assert code == 2


def test_constants_csv_table(capsys):
    code, out = run(capsys, "constants", "--n", "4", "--s", "1", "--L", "8", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert len(rows) == 9
    lam = [float(r["lambda"]) for r in rows]
    assert all(b < a for a, b in zip(lam, lam[1:]))


def test_output_and_plot_files(tmp_path, capsys):
    out = tmp_path / "r.json"
    plot = tmp_path / "p.csv"
    code, _ = run(capsys, "constants", "--output", str(out), "--emit-plot", str(plot), "--L", "4")
    assert code == 0
    assert json.loads(out.read_text())["meta"]["L"] == 4
    lines = plot.read_text().splitlines()
    assert lines[0] == "x,y" and len(lines) == 6


def test_io_error(tmp_path, capsys):
    code, out = run(capsys, "constants", "--output", str(tmp_path / "missing" / "r.json"))
    assert code == 3


def test_deterministic_output(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["compare", "--eps", "1e-3", "--degrees", "2", "--output", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_survey_small(capsys, monkeypatch):
    monkeypatch.setenv("HLS_LAB_THREADS", "2")
    code, out = run(capsys, "survey", "--eps", "1e-3", "--degrees", "0", "2", "--betas", "1.0", "--zetas", "0.0")
    assert code == 0
    rep = json.loads(out.out)
    assert rep["summary"]["min_quotient"] >= rep["summary"]["C_loc"] * 0.95
    assert len(rep["records"]) == 2


def test_dual_command(capsys):
    code, out = run(capsys, "dual", "--n", "3", "--s", "1")
    assert code == 0
    s = json.loads(out.out)["summary"]
    assert s["max_identity_error"] <= 1e-5 and s["forced_chain_holds"]


def test_expansion_command(capsys):
    code, out = run(capsys, "expansion", "--degrees", "2", "--betas", "1.0")
    assert code == 0


def test_struwe_command(capsys):
    code, out = run(capsys, "struwe", "--k-max", "10", "--format", "csv")
    assert code == 0
    assert len(out.out.strip().splitlines()) == 11


def test_selftest_command(capsys):
    code, out = run(capsys, "selftest")
    assert code == 0
    assert all(r["passed"] for r in json.loads(out.out)["records"])


def test_failing_assertion_exits_1(capsys):
    # A single coarse step leaves an O(eps^2) slope error far above 1e-3.
    code, out = run(capsys, "expansion", "--degrees", "2", "--betas", "1.0", "--eps", "0.5")
    assert code == 1
    rep = json.loads(out.out)
    assert not rep["summary"]["passed"]
    assert rep["records"][0]["rel_error"] > 1e-3
