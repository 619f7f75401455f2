import csv
import json
import subprocess
import sys

import pytest

from gfa.examples import PROP34_TEXT


def gfa(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "gfa", *args], capture_output=True, text=True, cwd=cwd)


def test_classify_mollifier_json(tmp_path):
    out = tmp_path / "r.json"
    r = gfa("classify", "--builtin", "mollifier", "--tests", "moderate,tau,schwartz", "--json", str(out))
    assert r.returncode == 0, r.stderr
    doc = json.loads(out.read_text())
    assert [x["verdict"] for x in doc["results"]] == ["Pass", "Pass", "Pass"]
    assert doc["results"][0]["witnesses"]["N"] == 9
    assert doc["family"]["name"] == "mollifier" and doc["version"] == "0.1.0"
    assert doc["params"]["grid"]["count"] == 21


def test_classify_family_file_tau_fails(tmp_path):
    path = tmp_path / "prop34.gfa"
    path.write_text(f"dim = 1\nname = prop34\nu = {PROP34_TEXT}\n")
    out = tmp_path / "r.json"
    r = gfa("classify", "--family", str(path), "--tests", "tau", "--k-max", "1", "--json", str(out))
    # no annotation for file families, so a Fail is not a mismatch
    assert r.returncode == 0, r.stderr
    res = json.loads(out.read_text())["results"][0]
    assert res["verdict"] == "Fail"
    table = res["witnesses"]["ratio_table"]
    assert [round(v) for v in table.values()] == [4 * int(m) for m in table]


def test_classify_csv_rows(tmp_path):
    out = tmp_path / "rows.csv"
    r = gfa("classify", "--builtin", "bump", "--tests", "moderate", "--k-max", "0",
            "--m-max", "2", "--csv", str(out))
    assert r.returncode == 0, r.stderr
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["eps", "region", "alpha", "m_or_k", "sup_logmag", "fit_slope", "residual"]
    assert len(rows) == 2 * 12
    assert {row["m_or_k"] for row in rows} == {"1", "2"}


def test_custom_grid(tmp_path):
    out = tmp_path / "r.json"
    r = gfa("classify", "--builtin", "x_squared", "--tests", "moderate", "--eps-grid", "geom:4:16:13",
            "--k-max", "1", "--json", str(out))
    assert r.returncode == 0, r.stderr
    grid = json.loads(out.read_text())["params"]["grid"]
    assert grid["count"] == 13 and grid["eps_min"] == 2.0**-16


def test_spectrum_csv_tracks_modulation(tmp_path):
    out = tmp_path / "spec.csv"
    r = gfa("spectrum", "--builtin", "modulated_bump", "--tests", "slowscale-spectrum", "--csv", str(out))
    assert r.returncode == 0, r.stdout + r.stderr
    assert "Fail" in r.stdout
    rows = list(csv.DictReader(out.open()))
    assert rows and all(0.9 <= float(row["peak_xi_times_eps"]) <= 1.1 for row in rows)


def test_annotated_builtin_matching_exits_0():
    r = gfa("classify", "--builtin", "shifted_gauss", "--tests", "slowscale-support")
    assert r.returncode == 0 and "Fail" in r.stdout


def test_verdict_against_annotation_exits_1(monkeypatch, capsys):
    from gfa import cli, suite
    from gfa.report import ClassificationReport, Verdict

    monkeypatch.setattr(suite, "run_test",
                        lambda name, fam, p: ClassificationReport("slowscale_support", Verdict.PASS))
    assert cli.main(["classify", "--builtin", "shifted_gauss", "--tests", "slowscale-support"]) == 1
    assert "expected Fail" in capsys.readouterr().out


def test_inconclusive_exits_2(monkeypatch):
    from gfa import cli, suite
    from gfa.report import ClassificationReport, Verdict

    monkeypatch.setattr(suite, "run_test",
                        lambda name, fam, p: ClassificationReport("moderate", Verdict.INCONCLUSIVE))
    assert cli.main(["classify", "--builtin", "bump", "--tests", "moderate"]) == 2


@pytest.mark.parametrize("args", [
    ("classify", "--builtin", "nope"),
    ("classify", "--builtin", "bump", "--tests", "moderate,unknown"),
    ("classify", "--builtin", "bump", "--eps-grid", "lin:1:2:3"),
    ("classify", "--family", "/no/such/file.gfa"),
    ("classify",),
    ("frobnicate",),
    ("parse", "x1 +* 2"),
    ("parse", "x1", "--diff", "x2"),
])
def test_usage_errors_exit_3(args):
    r = gfa(*args)
    assert r.returncode == 3, (r.stdout, r.stderr)


def test_parse_prints_and_differentiates():
    r = gfa("parse", "x1^3")
    assert r.returncode == 0 and r.stdout.strip() == "x1^3"
    r = gfa("parse", "x1^3", "--diff", "x1,x1")
    assert r.returncode == 0 and r.stdout.strip() == "6*x1"


def test_parse_error_reports_position():
    r = gfa("parse", "sin(x1")
    assert r.returncode == 3
    assert "line 1, column 7" in r.stderr


def test_verify_quick_is_deterministic(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"v{i}.json"
        r = gfa("verify", "--quick", "--json", str(path))
        assert r.returncode == 0, r.stdout
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["quick"] and all(c["passed"] for c in doc["criteria"])


@pytest.mark.slow
def test_example510_regularity_suite(tmp_path):
    out = tmp_path / "r.json"
    r = gfa("classify", "--builtin", "example510", "--tests", "regularity-suite", "--json", str(out))
    assert r.returncode == 0, r.stdout + r.stderr
    res = json.loads(out.read_text())["results"][0]
    assert res["verdict"] == "Pass"
    subs = res["sub_reports"]
    assert subs["pointstar_at_0"]["verdict"] == "Pass" and subs["classical_at_0"]["verdict"] == "Fail"
    assert subs["check_at_x0"]["verdict"] == "Pass" and subs["tilde_at_x0"]["verdict"] == "Fail"
    assert all(subs[f"check_at_a{m}"]["verdict"] == "Fail" for m in (1, 2, 3))
