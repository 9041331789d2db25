import json
import subprocess
import sys

import pytest

from activescalar.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main


def write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def supercritical(tmp_path, **over):
    d = {"scenario": "slightly-supercritical",
         "solver": {"dissipation": {"kind": "log_supercritical"}, "n": 64, "t_end": 0.2, "dt_initial": 0.05},
         "initial_data": {"preset": "two-mode", "amplitude": 0.005}, "output_dir": "cli-run"}
    d.update(over)
    return write(tmp_path / "cfg.json", d)


def probe(tmp_path):
    # far too short for a tenfold growth contrast, so the run reports failure
    return write(tmp_path / "probe.json", {
        "scenario": "blowup-probe",
        "solver": {"dissipation": {"kind": "fractional", "alpha": 0.1}, "n": 64, "t_end": 0.01},
        "initial_data": {"preset": "steep-odd", "amplitude": 1.0}, "alphas": [0.1, 0.45],
        "output_dir": "probe"})


def test_simulate_passes_and_honours_output_root(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("ACTIVESCALAR_OUTPUT_ROOT", str(tmp_path / "root"))
    assert main(["simulate", "--config", supercritical(tmp_path), "--no-plots"]) == EXIT_OK
    assert (tmp_path / "root" / "cli-run" / "trajectory.csv").exists()
    assert "[PASS] gradient_below_B" in capsys.readouterr().out


def test_output_dir_override(tmp_path, monkeypatch):
    monkeypatch.setenv("ACTIVESCALAR_OUTPUT_ROOT", str(tmp_path))
    target = tmp_path / "abs"
    assert main(["simulate", "--config", supercritical(tmp_path), "--no-plots", "--output-dir", str(target)]) == 0
    assert (target / "result.json").exists()


def test_failed_check_exits_one(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("ACTIVESCALAR_OUTPUT_ROOT", str(tmp_path))
    assert main(["simulate", "--config", probe(tmp_path), "--no-plots"]) == EXIT_FAILED
    assert "[FAIL] growth_ordering" in capsys.readouterr().out


def test_config_errors_exit_two(tmp_path, capsys):
    bad = write(tmp_path / "bad.json", {"scenario": "eventual-regularization", "alpha_": 1,
                                        "modulus": {"beta": 0.3}})
    assert main(["simulate", "--config", bad]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "unknown key 'alpha_'" in err
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    # subcommands only accept their own scenarios
    assert main(["verify", "--config", supercritical(tmp_path)]) == EXIT_CONFIG
    assert main(["sweep", "--config", supercritical(tmp_path)]) == EXIT_CONFIG
    assert main(["kernel-table", "--sigma", "2", "--out", str(tmp_path / "k.csv")]) == EXIT_CONFIG


def test_kernel_table_command(tmp_path, capsys):
    out = tmp_path / "sub" / "kernel.csv"
    assert main(["kernel-table", "--sigma", "0.1", "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == "y,K,K1,K2,m,bound_ratio"
    assert "512 radii" in capsys.readouterr().out


def test_sweep_with_workers(tmp_path, monkeypatch):
    monkeypatch.setenv("ACTIVESCALAR_OUTPUT_ROOT", str(tmp_path))
    cfg = write(tmp_path / "sweep.json", {
        "scenario": "epsilon-sweep",
        "solver": {"dissipation": {"kind": "fractional", "alpha": 0.3}, "n": 64, "t_end": 0.1,
                   "dt_initial": 0.02},
        "initial_data": {"preset": "two-mode"}, "alphas": [0.2, 0.4], "epsilon_ladder": [0.01, 0.0],
        "output_dir": "sweep"})
    assert main(["sweep", "--config", cfg, "--no-plots", "--workers", "2"]) == EXIT_OK
    serial = tmp_path / "serial"
    assert main(["sweep", "--config", cfg, "--no-plots", "--output-dir", str(serial)]) == EXIT_OK
    for name in ("cell_a0_e0.csv", "cell_a1_e1.csv"):
        assert (tmp_path / "sweep" / name).read_bytes() == (serial / name).read_bytes()


def test_module_entry_point_help():
    out = subprocess.run([sys.executable, "-m", "activescalar.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("simulate", "verify", "sweep", "kernel-table", "calibrate"):
        assert cmd in out.stdout


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
