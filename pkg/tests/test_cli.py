import csv
import subprocess
import sys

import numpy as np
import pytest

from robust_spc import cli
from robust_spc.chart import limits_for_alpha, signal_probability

FAST = ["--calibration-replicates", "400", "--correction-replicates", "5000"]


def test_parse_example():
    cfg = cli.parse_and_validate("mse --model m1 --a 1:0.5:4 --n 5 --k 50 --seed 42".split())
    assert [m.a for m in cfg.spec.models] == [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
    assert cfg.spec.seed == 42 and cfg.spec.n == 5 and cfg.spec.k == 50


def test_qn_variant_flag():
    cfg = cli.parse_and_validate("mse --scale qn --qn-variant rc".split())
    assert cfg.spec.scales == ("qn-rc",)
    assert cli.parse_and_validate("mse --scale qn".split()).spec.scales == ("qn",)


@pytest.mark.parametrize(
    "text, grid",
    [("1:0.5:4", 7), ("2,3,4", 3), ("4", 1), ("1:0.1:2", 11)],
)
def test_a_grid(text, grid):
    assert len(cli.parse_a_grid(text)) == grid


@pytest.mark.parametrize("text", ["1:0:4", "4:1:1", "1:2", "x", ""])
def test_bad_a_grid(text):
    with pytest.raises(ValueError):
        cli.parse_a_grid(text)


def test_model2_needs_integer_df():
    with pytest.raises(cli.UsageError) as info:
        cli.parse_and_validate("mse --model m2 --a 2.5".split())
    assert "integer" in str(info.value)


def test_all_errors_reported():
    with pytest.raises(cli.UsageError) as info:
        cli.parse_and_validate("arl --scale iqr --loc trim --n 1 --model m2 --a 2.5 --replicates 5".split())
    errs = " | ".join(info.value.errors)
    for part in ("iqr", "trim", "n must be", "integer", "at least 100"):
        assert part in errs
    assert len(info.value.errors) >= 5


def test_usage_exit_code(capsys):
    assert cli.main(["mse", "--n", "1"]) == cli.EXIT_USAGE
    assert "error" in capsys.readouterr().err
    assert cli.main(["frobnicate"]) == cli.EXIT_USAGE


def test_config_file_and_override(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# study\nn = 7\nk=30\nseed = 9\nscale = mad,qn\n--a = 2:1:4\n")
    cfg = cli.parse_and_validate(["mse", "--config", str(conf), "--seed", "11", "--model", "m1"])
    assert (cfg.spec.n, cfg.spec.k, cfg.spec.seed) == (7, 30, 11)
    assert cfg.spec.scales == ("mad", "qn")
    assert [m.a for m in cfg.spec.models] == [2.0, 3.0, 4.0]
    conf.write_text("bogus = 1\n")
    with pytest.raises(cli.UsageError):
        cli.parse_and_validate(["mse", "--config", str(conf)])


def test_replicates_routing():
    assert cli.parse_and_validate("mse --replicates 700".split()).spec.mse_replicates == 700
    assert cli.parse_and_validate("arl --replicates 700".split()).spec.arl_replicates == 700
    cfg = cli.parse_and_validate("reproduce --replicates 1000".split())
    assert (cfg.spec.mse_replicates, cfg.spec.arl_replicates) == (1000, 200)


def _write(path, rows, header=True):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow([f"x{i + 1}" for i in range(len(rows[0]))])
        w.writerows(rows)
    return path


@pytest.fixture
def phase_files(tmp_path):
    rng = np.random.default_rng(3)
    p1 = _write(tmp_path / "p1.csv", rng.standard_normal((50, 5)).tolist())
    p2 = _write(tmp_path / "p2.csv", (rng.standard_normal((6, 5)) * np.array([[1], [1], [1], [1], [1], [6]])).tolist())
    return p1, p2


def _read_body(path):
    return [l for l in path.read_text().splitlines() if not l.startswith("#")]


def test_chart_command(tmp_path, phase_files):
    p1, p2 = phase_files
    out = tmp_path / "out"
    argv = ["chart", "--phase1", str(p1), "--phase2", str(p2), "--scale", "mad", "--loc", "hd",
            "--out", str(out), "--cache-dir", str(tmp_path / "c"), *FAST]
    assert cli.main(argv) == cli.EXIT_OK
    limits = dict(l.split(",") for l in _read_body(out / "limits.csv")[1:])
    lcl, center, ucl = float(limits["lcl"]), float(limits["center"]), float(limits["ucl"])
    assert lcl < center < ucl
    head = (out / "limits.csv").read_text()
    for field in ("# alpha_star:", "# l_factor:", "# u_factor:", "# correction:", "# calibration:", "# seed: 0"):
        assert field in head
    assert "threads" not in head and "cache" not in head
    rows = list(csv.DictReader(_read_body(out / "phase2.csv")))
    assert len(rows) == 6
    assert rows[-1]["signal"] == "1"
    for r in rows:
        assert (r["signal"] == "1") == (not lcl <= float(r["sd"]) <= ucl)


def test_chart_signal_probability_for_large_disturbance(tmp_path):
    # with 25-point subgroups a tripled sigma is nearly always caught
    rng = np.random.default_rng(8)
    p1 = _write(tmp_path / "p1.csv", rng.standard_normal((30, 25)).tolist())
    out = tmp_path / "out"
    assert cli.main(["chart", "--phase1", str(p1), "--out", str(out), "--cache-dir", str(tmp_path / "c"), *FAST]) == 0
    head = {l[2:].split(": ", 1)[0]: l[2:].split(": ", 1)[1] for l in (out / "limits.csv").read_text().splitlines()
            if l.startswith("# ") and ": " in l}
    body = dict(l.split(",") for l in _read_body(out / "limits.csv")[1:])
    lim = limits_for_alpha(float(body["center"]), 25, float(head["alpha_star"]))
    assert signal_probability(lim, phi=3.0) > 0.99
    assert 1 - signal_probability(lim, sigma_true=float(body["center"])) == pytest.approx(
        1 - float(head["alpha_star"]), abs=1e-12)


@pytest.mark.parametrize(
    "rows, header, message",
    [
        ([[1, 2, 3], [1, 2]], True, "expected"),
        ([[1, 2, 3], [1, "x", 3]], True, "non-numeric"),
        ([[1, 2, 3]], False, "header"),
    ],
)
def test_chart_data_errors(tmp_path, capsys, rows, header, message):
    path = tmp_path / "bad.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(["a", "b", "c"])
        w.writerows(rows)
    code = cli.main(["chart", "--phase1", str(path), "--out", str(tmp_path), "--cache-dir", str(tmp_path / "c"), *FAST])
    assert code == cli.EXIT_DATA
    assert message in capsys.readouterr().err


def test_chart_n_mismatch(tmp_path, phase_files):
    p1, _ = phase_files
    code = cli.main(["chart", "--phase1", str(p1), "--n", "4", "--out", str(tmp_path), *FAST])
    assert code == cli.EXIT_DATA


def test_chart_missing_file(tmp_path):
    assert cli.main(["chart", "--phase1", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == cli.EXIT_DATA


def test_calibration_failure_exit_code(tmp_path, phase_files):
    p1, _ = phase_files
    code = cli.main(["chart", "--phase1", str(p1), "--target-arl0", "1e9", "--out", str(tmp_path),
                     "--cache-dir", str(tmp_path / "c"), *FAST])
    assert code == cli.EXIT_CALIBRATION


def test_calibrate_command(tmp_path):
    out = tmp_path / "out"
    argv = ["calibrate", "--scale", "sd,mad", "--loc", "mean", "--k", "10", "--out", str(out),
            "--cache-dir", str(tmp_path / "c"), *FAST]
    assert cli.main(argv) == 0
    rows = list(csv.DictReader(_read_body(out / "calibration.csv")))
    assert [r["artifact"] for r in rows] == ["correction", "correction", "alpha_star", "alpha_star"]
    assert len((tmp_path / "c" / "calibration.jsonl").read_text().splitlines()) == 4


def test_mse_command_writes_figures(tmp_path):
    out = tmp_path / "out"
    argv = ["mse", "--model", "m1", "--a", "1,4", "--scale", "sd,mad", "--loc", "mean", "--k", "10",
            "--replicates", "200", "--out", str(out), "--cache-dir", str(tmp_path / "c"), "--threads", "1", *FAST]
    assert cli.main(argv) == 0
    assert (out / "mse.csv").read_text().startswith("# study: mse\n# command: mse\n")
    assert len(list((out / "figures").glob("fig02_*.csv"))) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "robust_spc", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in cli.COMMANDS:
        assert cmd in res.stdout
