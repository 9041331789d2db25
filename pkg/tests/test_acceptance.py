"""Acceptance criteria, one test each.

Every test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion together with the measured quantities.
"""
import json
import math
import time
from collections import Counter
from pathlib import Path

import pytest
from hypothesis import given, settings

from activescalar.experiments.config import config_from_dict, load_config, write_config
from activescalar.experiments.presets import NONNEGATIVE_PRESETS, preset
from activescalar.experiments.scenarios import run_scenario
from activescalar.solver import SolverConfig, run
from activescalar.spectral import MultiplierSpec, PeriodicGrid
from activescalar.verifier import (calibrate_breakthrough, breakthrough_samples, breakthrough_suite,
                                   hilbert_increment_suite, load_calibration, operator_equivalence_records,
                                   supercritical_suite)
from test_config import run_configs

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
pytestmark = pytest.mark.slow

# the 𝓛 = 𝓛1 + 𝓛2 far-operator estimate is reported by the verify suite but is not one of the chain links
CHAIN_EXCLUDED = {"supercritical_far_operator_bound"}


@pytest.fixture
def output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("ACTIVESCALAR_OUTPUT_ROOT", str(tmp_path))
    return tmp_path


def failures(records):
    return [r for r in records if not r.passed]


def summary(records):
    bad = failures(records)
    return f"{len(records) - len(bad)}/{len(records)} records pass"


@pytest.mark.criterion(1, "operator oracle equivalence")
def test_operator_equivalence(record_property):
    start = time.perf_counter()
    records = operator_equivalence_records(count=20, alphas=(0.1, 0.25, 0.4))
    elapsed = time.perf_counter() - start
    kinds = Counter(r.name for r in records)
    record_property("records", dict(kinds))
    record_property("seconds", f"{elapsed:.1f}")
    assert kinds["operator_pv_fractional"] == 20 * 3 * 10
    assert kinds["operator_log_kernel"] == 20 * 10
    assert not failures(records), failures(records)[:3]
    assert elapsed < 60


@pytest.mark.criterion(2, "maximum principle and L2 bound")
def test_maximum_principle(record_property):
    start = time.perf_counter()
    grid = PeriodicGrid(1024)
    worst_sup_rise, worst_l2 = -math.inf, -math.inf
    assert len(NONNEGATIVE_PRESETS) >= 5
    for name in NONNEGATIVE_PRESETS[:5]:
        theta0 = preset(name, grid)
        assert theta0.values.min() >= 0
        for alpha in (0.2, 0.3, 0.45):
            cfg = SolverConfig(MultiplierSpec.fractional(alpha), grid, t_end=5.0, record_every=5)
            traj = run(theta0, cfg)
            assert traj[-1].t == 5.0
            sups = [r.sup_norm for r in traj]
            worst_sup_rise = max(worst_sup_rise, max(b - a for a, b in zip(sups, sups[1:])))
            worst_l2 = max(worst_l2, max(r.l2_norm / traj[0].l2_norm for r in traj) - 1)
    elapsed = time.perf_counter() - start
    record_property("max_sup_increase", f"{worst_sup_rise:.2e}")
    record_property("max_l2_excess", f"{worst_l2:.2e}")
    record_property("seconds", f"{elapsed:.1f}")
    assert worst_sup_rise <= 1e-6
    assert worst_l2 <= 1e-6
    assert elapsed < 300


@pytest.mark.criterion(3, "Hilbert increment bound")
def test_hilbert_increment_bench(record_property):
    records, fitted = hilbert_increment_suite()
    by_name = Counter(r.name for r in records)
    record_property("samples", by_name["hilbert_increment"])
    record_property("C", load_calibration()["hilbert_increment"]["C"])
    record_property("C_fit", f"{fitted['hilbert_increment_C_fit']:.6g}")
    record_property("C_fit_doubled", f"{fitted['hilbert_increment_C_fit_doubled']:.6g}")
    signs = [r for r in records if r.name == "hilbert_increment_sign_identity"]
    assert signs and all(r.params["points"] >= 1000 for r in signs)
    assert by_name["hilbert_increment"] >= 100
    assert by_name["hilbert_increment_fit_stability"] == 1
    assert not failures(records), failures(records)[:3]


@pytest.mark.criterion(4, "breakthrough numerator calibration")
def test_breakthrough_calibration(record_property):
    cal = load_calibration()
    frozen = cal["breakthrough"]
    records, _ = breakthrough_suite()
    record_property("C1", frozen["C1"])
    record_property("C2", frozen["C2"])
    record_property("verdicts", summary(records))
    assert records
    assert not failures(records), failures(records)[:3]
    # the bisection reproduces the frozen pair
    again = calibrate_breakthrough(breakthrough_samples(delta=frozen["delta"]), cal["hilbert_increment"]["C"],
                                frozen["delta"])
    assert again["C1"] == pytest.approx(frozen["C1"], rel=1e-9)
    assert again["C2"] == pytest.approx(frozen["C2"], rel=1e-9)


@pytest.mark.criterion(5, "eventual regularization")
def test_eventual_regularization(output_root, record_property):
    cfg = load_config(CONFIGS / "eventual-regularization.json")
    assert cfg.solver.grid.n == 1024
    assert 0.0 in cfg.epsilon_ladder
    start = time.perf_counter()
    result = run_scenario(cfg, plots_enabled=False)
    elapsed = time.perf_counter() - start
    m = result.measured
    record_property("worst_gap", f"{m['worst_gap']:.3e}")
    record_property("t_star", f"{m['t_star']:.4g}")
    record_property("holder_post_max", f"{m['holder_post_max']:.4g}")
    record_property("holder_bound", f"{m['holder_bound']:.4g}")
    record_property("seconds", f"{elapsed:.1f}")
    assert not result.errors, result.errors
    assert result.checks == {"amplitude_hypothesis": True, "gap_negative": True, "xi0_extinction": True,
                             "holder_after_t_star": True, "completed": True}
    assert elapsed < 600


@pytest.mark.criterion(6, "supercritical modulus chain")
def test_supercritical_chain(record_property):
    cal = load_calibration()["supercritical"]
    records, fitted = supercritical_suite()
    links = [r for r in records if r.name not in CHAIN_EXCLUDED]
    names = Counter(r.name for r in links)
    record_property("kappa", cal["kappa"])
    record_property("gamma", cal["gamma"])
    record_property("sigma", cal["sigma"])
    record_property("links", summary(links))
    excluded = [r for r in records if r.name in CHAIN_EXCLUDED]
    record_property("far_operator_bound", summary(excluded))
    for link in ("supercritical_tail_bound", "supercritical_lower_bound", "supercritical_dissipation_lower", "supercritical_novel_step_sign",
                 "supercritical_show"):
        assert names[link] > 0, link
    show_xis = [r.params["xi"] for r in links if r.name == "supercritical_show"]
    assert 0 < min(show_xis) and max(show_xis) < cal["sigma"]
    assert not failures(links), failures(links)[:3]


@pytest.mark.criterion(7, "slightly supercritical global run")
def test_slightly_supercritical(output_root, record_property):
    cfg = load_config(CONFIGS / "slightly-supercritical.json")
    assert cfg.solver.t_end == 20.0
    assert cfg.initial_data.preset == "two-mode"
    start = time.perf_counter()
    result = run_scenario(cfg, plots_enabled=False)
    elapsed = time.perf_counter() - start
    m = result.measured
    record_property("B", m["B"])
    record_property("grad_sup_max", f"{m['grad_sup_max']:.4g}")
    record_property("max_spectrum_tail", f"{m['max_spectrum_tail']:.2e}")
    record_property("seconds", f"{elapsed:.1f}")
    assert not result.errors, result.errors
    for check in ("b_selected", "completed", "gradient_below_B", "resolved"):
        assert result.checks[check], check
    assert m["t_final"] == 20.0
    assert elapsed < 600


@pytest.mark.criterion(8, "blow-up contrast probe")
def test_blowup_probe(output_root, record_property):
    cfg = load_config(CONFIGS / "blowup-probe.json")
    assert cfg.initial_data.preset == "steep-odd"
    assert tuple(cfg.alphas) == (0.1, 0.45)
    result = run_scenario(cfg, plots_enabled=False)
    m = result.measured
    record_property("growth_ratio", f"{m['growth_ratio']:.3g}")
    record_property("matched_time", f"{m['matched_time']:.3g}")
    assert m["growth_ratio"] >= 10
    assert result.checks["growth_ordering"]


@pytest.mark.criterion(9, "determinism and round-trip")
def test_byte_identical_reruns(tmp_path, monkeypatch, record_property):
    cfg = load_config(CONFIGS / "slightly-supercritical.json")
    outputs = []
    for i in range(2):
        monkeypatch.setenv("ACTIVESCALAR_OUTPUT_ROOT", str(tmp_path / f"root{i}"))
        result = run_scenario(cfg)
        files = {p.name: p.read_bytes() for p in sorted(result.output_dir.iterdir())}
        outputs.append(files)
    names = sorted(outputs[0])
    assert any(n.endswith(".csv") for n in names) and "result.json" in names
    assert outputs[0] == outputs[1]
    for path in sorted(CONFIGS.glob("*.json")):
        shipped = load_config(path)
        assert load_config(write_config(shipped, tmp_path / path.name)) == shipped
        assert json.loads(shipped.to_json()) == json.loads(config_from_dict(json.loads(shipped.to_json())).to_json())
    record_property("files_compared", len(names))


@pytest.mark.criterion(9, "determinism and round-trip")
@settings(max_examples=200, deadline=None)
@given(run_configs())
def test_random_config_round_trip(data):
    cfg = config_from_dict(data)
    assert config_from_dict(json.loads(cfg.to_json())) == cfg
