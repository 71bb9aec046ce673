"""Command-line interface: exit codes, JSON output, artifacts, determinism."""

import io
import contextlib
import filecmp
import json
import os
import subprocess
import sys

import pytest

from cusp_induce import cli


def run(*args):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(list(args))
    return code, buf.getvalue()


def run_json(*args):
    code, out = run(*args)
    return code, json.loads(out)


def test_validate_passes_on_builtin_family():
    code, doc = run_json("validate", "--family", "chebyshev")
    assert code == 0
    assert doc["nondegeneracy"]["passed"] is True
    assert doc["map"] == "chebyshev"


def test_validate_unknown_family_is_usage_error():
    code, doc = run_json("validate", "--family", "nosuch")
    assert code == 2
    assert doc["error"]["kind"] == "MapConfigError"


def test_validate_unknown_param_is_usage_error():
    code, doc = run_json("validate", "--family", "chebyshev",
                         "--param", "bogus=1")
    assert code == 2


def test_validate_missing_config_file():
    code, doc = run_json("validate", "--config", "/nonexistent/map.json")
    assert code == 2


def test_config_and_family_are_mutually_exclusive():
    code, doc = run_json("validate", "--family", "chebyshev",
                         "--config", "x.json")
    assert code == 2
    assert "mutually exclusive" in doc["error"]["message"]


def test_orbit_writes_artifacts(tmp_path):
    out = str(tmp_path / "orbit_run")
    code, doc = run_json("orbit", "--family", "chebyshev", "--n", "25",
                         "--out", out)
    assert code == 0
    assert os.path.exists(os.path.join(out, "orbit.json"))
    assert os.path.exists(os.path.join(out, "orbit_0.csv"))
    assert os.path.exists(os.path.join(out, "orbit_1.csv"))


def test_star_check_passes_and_fails():
    code, doc = run_json("star-check", "--family", "chebyshev")
    assert code == 0
    assert doc["passed"] is True
    code, doc = run_json("star-check", "--family", "unimodal",
                         "--param", "a=1.76")
    assert code == 1
    assert doc["passed"] is False


def test_hyperbolicity_chooses_scales():
    code, doc = run_json("hyperbolicity", "--family", "chebyshev")
    assert code == 0
    assert doc["delta"] == 0.01
    assert doc["report"]["q0"] == 7
    assert doc["report"]["h_delta"] == 6


def test_hyperbolicity_unreachable_margin_fails_with_diagnostics():
    code, doc = run_json("hyperbolicity", "--family", "chebyshev",
                         "--margin", "1e9")
    assert code == 1
    assert doc["diagnostics"]


def test_hyperbolicity_rejects_fixed_singular_point():
    code, _doc = run_json("hyperbolicity", "--family", "singular_unimodal")
    assert code == 1


def test_induce_writes_partition(tmp_path):
    out = str(tmp_path / "induce_run")
    code, doc = run_json("induce", "--family", "lorenz", "--delta", "0.2",
                         "--q0", "5", "--out", out)
    assert code == 0
    assert doc["partition"]["n_branches"] == 40
    assert doc["partition"]["min_inf_df"] >= 2.0
    assert os.path.exists(os.path.join(out, "partition.csv"))


def test_summability_verdict():
    code, doc = run_json("summability", "--family", "lorenz",
                         "--delta", "0.2", "--q0", "5")
    assert code == 0
    assert doc["summability"]["passed"] is True


def test_density_report():
    code, doc = run_json("density", "--family", "lorenz", "--delta", "0.2",
                         "--q0", "5", "--m", "256")
    assert code == 0
    d = doc["density"]
    assert d["m"] == 256
    assert d["invariance_residual"] < 0.05
    assert d["density_min"] >= 0


def test_scan_rows_in_input_order():
    code, doc = run_json("scan", "--family", "unimodal",
                         "--grid", "a=1.76,2.0")
    assert code == 0
    rows = doc["rows"]
    assert [r["params"]["a"] for r in rows] == [1.76, 2.0]
    assert rows[0]["star_verdict"] == "fail"
    assert rows[1]["star_verdict"] == "summable-so-far"


def test_scan_csv_format(capsys):
    code, out = run("scan", "--family", "unimodal", "--grid", "a=2.0",
                    "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("family,a,")
    assert len(lines) == 2


def test_unknown_subcommand_rejected():
    with pytest.raises(SystemExit):
        run("frobnicate")


def test_pipeline_artifacts_and_determinism(tmp_path):
    args = ("pipeline", "--family", "lorenz", "--m", "256")
    out1, out2 = str(tmp_path / "r1"), str(tmp_path / "r2")
    code1, doc1 = run_json(*args, "--out", out1)
    code2, doc2 = run_json(*args, "--out", out2)
    assert code1 == code2 == 0
    assert doc1 == doc2
    assert doc1["passed"] is True
    names = sorted(os.listdir(out1))
    assert sorted(os.listdir(out2)) == names
    assert "pipeline.json" in names
    assert "partition.csv" in names
    assert "density.csv" in names
    match, mismatch, errors = filecmp.cmpfiles(out1, out2, names,
                                               shallow=False)
    assert mismatch == [] and errors == []


def test_pipeline_reports_failed_stage():
    code, doc = run_json("pipeline", "--family", "singular_unimodal",
                         "--m", "128")
    assert code == 1
    assert doc["failed_stage"] == "star"


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cusp_induce.cli", "validate",
         "--family", "lorenz"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["nondegeneracy"]["passed"] is True
