from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from travelwave.cli import main

REF = ["--m", "2", "--p", "1", "--beta", "0.5", "--b", "1"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def error_line(err):
    return json.loads(err.strip().splitlines()[-1])


def test_trajectory_csv(capsys):
    code, out, _ = run(capsys, "trajectory", *REF, "--k", "0", "--theta-max", "10")
    assert code == 0
    table = rows(out)
    assert table[0] == ["theta", "upsilon", "rhs"]
    by_theta = {float(r[0]): r for r in table[1:]}
    assert float(by_theta[1.0][1]) == pytest.approx(1.264911, abs=1e-6)
    assert float(table[-1][0]) == 10.0
    # rhs column is d upsilon / d theta = 1.25 sqrt(1.6) theta^0.25 for this case
    assert float(by_theta[1.0][2]) == pytest.approx(1.25 * math.sqrt(1.6), rel=1e-9)


def test_csv_format(capsys):
    _, out, _ = run(capsys, "trajectory", *REF, "--k", "1", "--theta-max", "100", "--nodes")
    assert "\r" not in out and out.endswith("\n")
    for line in out.splitlines()[1:6]:
        for field in line.split(","):
            assert field == "%.17e" % float(field)


def test_trajectory_grid_options(capsys):
    _, out, _ = run(capsys, "trajectory", *REF, "--k", "0", "--theta-max", "10",
                    "--theta-min", "0.1", "--grid-points", "5")
    thetas = [float(r[0]) for r in rows(out)[1:]]
    assert len(thetas) == 5 and thetas[0] == pytest.approx(0.1) and thetas[-1] == 10.0


def test_missing_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "trajectory", "--m", "2", "--p", "1", "--beta", "0.5", "--b", "1")
    assert code == 1
    assert "usage:" in err
    info = error_line(err)
    assert info["code"] == 1 and info["error"] == "usage" and "--k" in info["message"]


def test_unknown_flag_and_no_command(capsys):
    assert run(capsys, "trajectory", *REF, "--k", "0", "--bogus", "1")[0] == 1
    assert run(capsys)[0] == 1


def test_slow_diffusion_violation(capsys):
    code, _, err = run(capsys, "trajectory", "--m", "0.5", "--p", "1", "--beta", "0.5", "--b", "1", "--k", "0")
    assert code == 1
    info = error_line(err)
    assert info["error"] == "validation" and "mp" in info["message"]


def test_non_numeric_and_bad_tolerance(capsys):
    assert run(capsys, "trajectory", *REF, "--k", "zero")[0] == 1
    assert run(capsys, "trajectory", *REF, "--k", "0", "--tol", "-1")[0] == 1


def test_profile_rows(capsys):
    code, out, _ = run(capsys, "profile", *REF, "--k", "0", "--z-values", "0.5,1,2")
    assert code == 0
    table = rows(out)
    assert table[0] == ["z", "phi", "flux"]
    assert float(table[2][1]) == pytest.approx(0.225 ** (2 / 3), rel=1e-8)
    assert float(table[2][1]) == pytest.approx(0.369928, abs=1e-5)


def test_profile_zero_extension(capsys):
    code, out, _ = run(capsys, "profile", *REF, "--k", "0", "--theta-max", "10",
                       "--zero-extend", "--grid-points", "20")
    assert code == 0
    table = [[float(v) for v in r] for r in rows(out)[1:]]
    assert len(table) == 41
    zero = [r for r in table if r[0] == 0.0]
    assert zero == [[0.0, 0.0, 0.0]]
    assert all(r[1] == 0.0 and r[2] == 0.0 for r in table if r[0] < 0)
    assert any(r[0] < -1 for r in table)


def test_profile_zero_and_negative_values(capsys):
    _, out, _ = run(capsys, "profile", *REF, "--k", "1", "--z-values=-1,0,1")
    table = [[float(v) for v in r] for r in rows(out)[1:]]
    assert table[0][1:] == [0.0, 0.0] and table[1][1:] == [0.0, 0.0]
    assert table[2][1] > 0


def test_profile_speed_frame(capsys):
    _, out, _ = run(capsys, "profile", *REF, "--k", "1", "--z-values", "1,2", "--speed-frame", "3")
    table = rows(out)
    assert table[0] == ["z", "phi", "flux", "x"]
    assert [float(r[3]) for r in table[1:]] == [2.0, 1.0]


def test_profile_out_of_range(capsys):
    code, _, err = run(capsys, "profile", *REF, "--k", "0", "--theta-max", "10", "--z-values", "1,1000")
    assert code == 4
    assert error_line(err)["error"] == "range"


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "trajectory", *REF, "--k", "0", "--theta-max", "10",
                       "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 3
    assert error_line(err)["error"] == "io"


def test_verify_zero_speed(capsys, tmp_path):
    out_path = tmp_path / "report.txt"
    code, out, _ = run(capsys, "verify", *REF, "--k", "0", "--out", str(out_path))
    assert code == 0 and out == ""
    report = dict(line.split(" = ", 1) for line in out_path.read_text().splitlines())
    assert report["pass"] == "true"
    assert float(report["oracle.deviation"]) <= 1e-6
    for key in ("residual.max_rel", "bracket.gap", "asymptote[0].deviation"):
        assert key in report


def test_verify_positive_speed_entries(capsys):
    code, out, _ = run(capsys, "verify", *REF, "--k", "1")
    assert code == 0
    report = dict(line.split(" = ", 1) for line in out.splitlines())
    targets = [report[k] for k in report if k.endswith(".target")]
    assert sorted(targets) == ["profile", "profile", "trajectory", "trajectory"]


def test_verify_near_critical_rejected(capsys):
    for beta in ("0.5000000000001", "0.4999999999999"):
        code, _, err = run(capsys, "verify", "--m", "1.5", "--p", "1", "--beta", beta, "--b", "1", "--k", "1")
        assert code == 1
        assert error_line(err)["error"] == "validation"


def test_verify_failure_exit_code(capsys):
    # a one-decade range leaves the infinity law far from converged
    code, out, _ = run(capsys, "verify", *REF, "--k", "1", "--theta-max", "10", "--oracle-h", "0")
    assert code == 5
    assert out.splitlines()[-1] == "pass = false"


def test_sweep(capsys, tmp_path):
    args = ["sweep", "--m", "2", "--p", "1", "--b", "1", "--sweep", "k=-1,1", "--sweep", "beta=0.3,0.5"]
    code, out, _ = run(capsys, *args)
    assert code == 0
    table = rows(out)
    assert table[0] == ["m", "p", "beta", "b", "k", "regime", "c_star", "status"]
    assert len(table) == 5
    assert [(float(r[2]), float(r[4])) for r in table[1:]] == [(0.3, -1), (0.3, 1), (0.5, -1), (0.5, 1)]
    assert all(r[5] == "Super" for r in table[1:])
    assert all(r[7] in ("pass", "fail", "inconclusive") for r in table[1:])
    _, again, _ = run(capsys, *args, "--workers", "2")
    assert again == out


def test_sweep_invalid_cell(capsys):
    code, out, _ = run(capsys, "sweep", "--p", "1", "--beta", "0.5", "--b", "1", "--k", "0", "--sweep", "m=0.5,2")
    assert code == 0
    table = rows(out)
    assert table[1][7] == "invalid" and table[1][5] == ""
    assert table[2][7] == "pass"


def test_sweep_needs_axis(capsys):
    assert run(capsys, "sweep", *REF, "--k", "0")[0] == 1
    assert run(capsys, "sweep", *REF, "--k", "0", "--sweep", "q=1,2")[0] == 1


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# reference case\nm = 2\np = 1\nbeta = 0.5\nb = 1\nk = 1  # overridden\ntheta-max = 10\n")
    _, from_cfg, _ = run(capsys, "trajectory", "--config", str(cfg), "--k", "0", "--grid-points", "3")
    _, direct, _ = run(capsys, "trajectory", *REF, "--k", "0", "--theta-max", "10", "--grid-points", "3")
    assert from_cfg == direct
    bad = tmp_path / "bad.cfg"
    bad.write_text("m 2\n")
    assert run(capsys, "trajectory", "--config", str(bad))[0] == 1
    assert run(capsys, "trajectory", "--config", str(tmp_path / "nope.cfg"))[0] == 3


def test_config_sweep_axes(capsys, tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("m = 2\np = 1\nb = 1\nbeta = 0.5\nsweep.k = 0,1\n")
    code, out, _ = run(capsys, "sweep", "--config", str(cfg))
    assert code == 0 and len(rows(out)) == 3


def test_plot_data(capsys, tmp_path):
    path = tmp_path / "ratios.csv"
    code, _, _ = run(capsys, "trajectory", *REF, "--k", "1", "--plot-data", str(path))
    assert code == 0
    table = rows(path.read_text())
    assert table[0] == ["target", "end", "x", "ratio"]
    kinds = {(r[0], r[1]) for r in table[1:]}
    assert kinds == {("trajectory", "origin"), ("trajectory", "infinity"),
                     ("profile", "origin"), ("profile", "infinity")}
    origin = [float(r[3]) for r in table[1:] if r[:2] == ["trajectory", "origin"]]
    assert origin[0] == pytest.approx(1.0, abs=0.02)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "travelwave", "trajectory", *REF, "--k", "0", "--theta-max", "10",
         "--grid-points", "3"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.splitlines()[0] == "theta,upsilon,rhs"
    bad = subprocess.run([sys.executable, "-m", "travelwave", "verify"], capture_output=True, text=True)
    assert bad.returncode == 1
