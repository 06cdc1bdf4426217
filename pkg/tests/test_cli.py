"""Command-line interface: subcommands, formats, exit codes."""

import json
import subprocess
import sys

import numpy as np
import pytest

from rfschain.cli import main
from rfschain.version import VERSION


def run_cli(argv, capsys):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == VERSION


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_installed_entry_point():
    proc = subprocess.run(["rfschain", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == VERSION


SWEEP_SMALL = ["sweep", "--model", "dimer", "--n", "4",
               "--param-min", "0.3", "--param-max", "0.7", "--steps", "5",
               "--routes", "energy", "--solver", "dense"]


def test_sweep_csv_stdout(capsys):
    rc, out, _ = run_cli(SWEEP_SMALL, capsys)
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == "param,e0,de0,d2e0,c12,c23,chi12_energy,chi23_energy,chi_global,gap,flags"
    assert len(lines) == 6
    first = lines[1].split(",")
    assert float(first[0]) == 0.3
    assert float(first[1]) < 0.0  # ground energy per spin


def test_sweep_deterministic(capsys):
    _, out_a, _ = run_cli(SWEEP_SMALL, capsys)
    _, out_b, _ = run_cli(SWEEP_SMALL, capsys)
    assert out_a == out_b


def test_sweep_json_file(tmp_path, capsys):
    target = tmp_path / "sweep.json"
    rc, out, _ = run_cli(SWEEP_SMALL + ["--format", "json",
                                        "--output", str(target)], capsys)
    assert rc == 0
    assert out == ""
    doc = json.loads(target.read_text())
    assert doc["meta"]["model"]["family"] == "dimer"
    assert doc["meta"]["model"]["n"] == 4
    assert doc["meta"]["routes"] == ["energy"]
    assert doc["meta"]["version"] == VERSION
    assert len(doc["records"]) == 5
    assert doc["records"][0]["param"] == 0.3


def test_sweep_all_routes_bb(capsys):
    rc, out, _ = run_cli(["sweep", "--model", "bb", "--n", "4",
                          "--param-min", "0.1", "--param-max", "0.3",
                          "--steps", "3", "--routes", "all",
                          "--solver", "dense"], capsys)
    assert rc == 0
    header = out.strip().split("\n")[0]
    # the spin-1 ring supports only the matrix route and the global one
    assert header == "param,e0,de0,d2e0,c12,c23,chi12_uhlmann,chi23_uhlmann,chi_global,gap,flags"


def test_sweep_figure(tmp_path, capsys):
    fig = tmp_path / "sweep.png"
    rc, _, _ = run_cli(SWEEP_SMALL + ["--output", str(tmp_path / "out.csv"),
                                      "--figure", str(fig)], capsys)
    assert rc == 0
    assert fig.exists()
    assert fig.stat().st_size > 1000


@pytest.mark.parametrize("argv", [
    ["sweep", "--model", "bb", "--routes", "correlator"],
    ["sweep", "--steps", "0"],
    ["sweep", "--param-min", "0.9", "--param-max", "0.3", "--steps", "5"],
    ["sweep", "--model", "mixed", "--spin-s", "0.7"],
    ["sweep", "--model", "mixed", "--spin-s", "oops"],
    ["sweep", "--n", "5"],
    ["scaling", "--sizes", "4,notanumber"],
    ["verify", "--only", "no-such-check"],
    ["analytic", "--family", "thermo", "--param-min", "0.0"],
    ["analytic", "--family", "thermo", "--thermo-p", "2.5"],
    ["analytic", "--param-min", "1.5", "--param-max", "0.5"],
    ["analytic", "--steps", "0"],
])
def test_usage_errors_exit_2(argv, capsys):
    rc, _, err = run_cli(argv, capsys)
    assert rc == 2
    assert "usage error" in err


def test_numerical_failure_exits_3(capsys):
    rc, _, err = run_cli(["sweep", "--n", "16", "--param-min", "0.4",
                          "--param-max", "0.5", "--steps", "2",
                          "--routes", "energy", "--solver", "dense"], capsys)
    assert rc == 3
    assert "numerical failure" in err


def test_verify_single_check(capsys):
    rc, out, _ = run_cli(["verify", "--only", "thermo-exponent"], capsys)
    assert rc == 0
    assert "PASS" in out
    assert "thermo-exponent" in out
    assert "1/1 checks passed" in out


def test_scaling_csv(capsys):
    rc, out, err = run_cli(["scaling", "--sizes", "4,6",
                            "--param-min", "0.3", "--param-max", "0.9",
                            "--steps", "13", "--routes", "energy",
                            "--solver", "dense"], capsys)
    assert rc == 0
    assert err == ""  # trends hold, so no violation warnings
    lines = out.strip().split("\n")
    assert lines[0] == "n,param_star,chi_star,grid_resolution"
    assert len(lines) == 3
    n4 = lines[1].split(",")
    assert int(n4[0]) == 4
    assert abs(float(n4[1]) - 0.5) < 1e-6
    assert abs(float(n4[2]) - 1.0 / 3.0) < 1e-5


def test_scaling_json_meta(tmp_path, capsys):
    target = tmp_path / "scaling.json"
    rc, _, _ = run_cli(["scaling", "--sizes", "4,6",
                        "--param-min", "0.3", "--param-max", "0.9",
                        "--steps", "13", "--routes", "energy",
                        "--solver", "dense", "--column", "chi23_energy",
                        "--format", "json", "--output", str(target)], capsys)
    assert rc == 0
    doc = json.loads(target.read_text())
    assert doc["meta"]["sizes"] == [4, 6]
    assert doc["meta"]["column"] == "chi23_energy"
    assert doc["meta"]["violations"] == []
    assert [row["n"] for row in doc["records"]] == [4, 6]


def test_analytic_n4_defaults(capsys):
    rc, out, _ = run_cli(["analytic"], capsys)
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == "param,e0,de0,d2e0,chi12,chi23"
    assert len(lines) == 102  # 101 grid points on [0, 2]
    rows = [line.split(",") for line in lines[1:]]
    assert float(rows[0][0]) == 0.0
    assert np.isclose(float(rows[0][1]), -0.375, atol=1e-15)
    chis = [float(r[4]) for r in rows]
    peak_row = rows[int(np.argmax(chis))]
    assert float(peak_row[0]) == pytest.approx(0.5)
    assert max(chis) == pytest.approx(1.0 / 3.0)


def test_analytic_thermo_json(tmp_path, capsys):
    target = tmp_path / "thermo.json"
    rc, _, _ = run_cli(["analytic", "--family", "thermo", "--steps", "9",
                        "--format", "json", "--output", str(target)], capsys)
    assert rc == 0
    doc = json.loads(target.read_text())
    meta = doc["meta"]
    assert meta["family"] == "thermo"
    assert meta["c"] == pytest.approx(0.3891)
    assert meta["p"] == pytest.approx(1.4417)
    assert meta["eta_fit_range"] == [0.001, 0.1]
    assert len(doc["records"]) == 9
    assert doc["records"][0]["param"] == pytest.approx(0.8182)
    assert all(row["chi23"] > 0 for row in doc["records"])


def test_analytic_thermo_below_pole_yields_nan(capsys):
    rc, out, _ = run_cli(["analytic", "--family", "thermo",
                          "--param-min", "0.45", "--param-max", "0.6",
                          "--steps", "4"], capsys)
    assert rc == 0
    lines = out.strip().split("\n")
    first = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert first["chi12"] == "nan"  # below the closed-form pole
    assert float(first["e0"]) < 0.0  # the energy itself is still defined
    last = dict(zip(lines[0].split(","), lines[4].split(",")))
    assert float(last["chi12"]) > 0.0


def test_model_info_dimer(capsys):
    rc, out, _ = run_cli(["model-info", "--model", "dimer", "--n", "8"], capsys)
    assert rc == 0
    assert "family: dimer" in out
    assert "sites: 8" in out
    assert "ground sector Sz: 0" in out
    assert "sector dimension: 70 of 256" in out
    assert "intra-cell bonds: [(0, 1), (2, 3), (4, 5), (6, 7)]" in out
    assert "alpha = 1" in out


def test_model_info_mixed_and_bb(capsys):
    rc, out, _ = run_cli(["model-info", "--model", "mixed", "--n", "4",
                          "--spin-s", "3/2", "--param", "0.5"], capsys)
    assert rc == 0
    assert "local spins: 0.5, 1.5, 0.5, 1.5" in out
    assert "ground sector Sz: 2" in out
    rc, out, _ = run_cli(["model-info", "--model", "bb", "--n", "4"], capsys)
    assert rc == 0
    assert "local spins: 1, 1, 1, 1" in out  # ring forces spin 1
    assert "theta (rad)" in out
    assert "inter-cell bonds: []" in out
