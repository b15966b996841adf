"""End-to-end checks of the command-line driver and its file outputs."""

import json
import os
import shutil
import subprocess

import pytest

BIN = os.environ.get("SIGNLAB_BIN")

pytestmark = pytest.mark.skipif(BIN is None, reason="SIGNLAB_BIN not set")


def run(*args, **kw):
    return subprocess.run([BIN, *args], capture_output=True, text=True, **kw)


def test_kernel_check_stdout():
    res = run("kernel-check", "--ell", "50", "--eta", "1", "--r-mult", "4", "8")
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[0].startswith("d,ell,eta,theta,kernel")
    assert len(lines) == 3


def test_sample_export(tmp_path):
    out = tmp_path / "sample.csv"
    res = run("sample", "--ell", "12", "--eta", "2", "--seed", "9", "--out", str(out))
    assert res.returncode == 0
    header = json.loads((tmp_path / "sample.csv.json").read_text())
    assert header["ell"] == 12
    assert header["eta"] == 2
    assert header["seed"] == 9
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "index,value"
    assert len(rows) - 1 == sum(2 * l + 1 for l in (11, 12))


def test_defect_rows():
    res = run("defect", "--ell", "32", "--u", "0", "0.5", "--r-mult", "8", "--seed", "3")
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[0] == "seed,d,ell,eta,u,r,d_tilde,d_centred,resolution"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "3"
    assert abs(float(first[6])) <= 1.0


def test_variance_json_output(tmp_path):
    out = tmp_path / "var"
    res = run(
        "variance", "--ell", "32", "--r-mult", "4", "8", "--u", "0",
        "--replicates", "64", "--seed", "5", "--workers", "2",
        "--out", str(out), "--format", "json", "--plot",
    )
    assert res.returncode == 0
    doc = json.loads((tmp_path / "var.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["config"]["seed"] == 5
    assert "config_hash" in doc["manifest"]
    assert (tmp_path / "var.csv").exists()  # --plot writes the CSV + script
    gp = (tmp_path / "var.gp").read_text()
    assert "var.csv" in gp


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "experiment": "variance",
                "ell_grid": [24],
                "r_mults": [4, 8],
                "u_list": [0.0],
                "replicates": 32,
                "seed": 11,
            }
        )
    )
    a = run("variance", "--config", str(cfg))
    assert a.returncode == 0
    b = run("variance", "--config", str(cfg), "--seed", "12")
    assert b.returncode == 0
    assert a.stdout != b.stdout  # the flag overrides the file seed


def test_imbalance_scan_small():
    res = run(
        "imbalance", "--ell", "16", "--mu", "2", "--r-rule", "rbar-mult",
        "--replicates", "4", "--seed", "2", "--workers", "2",
    )
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[0].startswith("ell,mu,scale")
    b_mean = float(lines[1].split(",")[4])
    assert 0.0 <= b_mean <= 2.0


def test_appendix_a_table():
    res = run("appendix-a", "--ell", "600", "--seed", "4")
    assert res.returncode == 0
    assert "zero_integral_max" in res.stdout
    assert "density_defect_rr" in res.stdout


def test_gnuplot_script_renders(tmp_path):
    if not shutil.which("gnuplot"):
        pytest.skip("gnuplot not installed")
    out = tmp_path / "plot"
    res = run("variance", "--ell", "24", "--r-mult", "4", "8", "--u", "0",
              "--replicates", "32", "--seed", "5", "--out", str(out),
              "--format", "csv", "--plot")
    assert res.returncode == 0
    g = subprocess.run(["gnuplot", "-e", "set terminal dumb", str(out) + ".gp"],
                       capture_output=True, cwd=tmp_path)
    assert g.returncode == 0


def test_exit_codes():
    bad = run("variance")  # empty grids -> config error
    assert bad.returncode == 2
    unknown = run("no-such-command")
    assert unknown.returncode == 2
    # numerical failure path: barrier regime violation is a config error (2)
    regime = run("concentration", "--ell", "16", "--r-mult", "4", "--eps", "-1")
    assert regime.returncode == 2
