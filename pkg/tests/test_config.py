import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from activescalar.errors import ConfigError
from activescalar.experiments.config import (SCENARIOS, config_from_dict, load_config, validate_config,
                                             write_config)
from activescalar.experiments.presets import PRESETS

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def minimal(**over):
    d = {"scenario": "eventual-regularization",
         "solver": {"dissipation": {"kind": "fractional", "alpha": 0.3}, "n": 64, "t_end": 0.1},
         "modulus": {"delta": 0.785, "beta": 0.7}}
    d.update(over)
    return d


def violations(d):
    with pytest.raises(ConfigError) as info:
        config_from_dict(d)
    return info.value.violations


def test_minimal_config_is_valid():
    cfg = config_from_dict(minimal())
    assert validate_config(cfg) == []
    assert cfg.alpha == 0.3 and cfg.solver.grid.n == 64


def test_beta_below_threshold_is_named():
    v = violations(minimal(modulus={"delta": 0.785, "beta": 0.3}))
    assert "β must exceed 1−2α = 0.4" in v


def test_unknown_keys_are_named():
    assert "unknown key 'alpha_' in config" in violations(minimal(alpha_=0.3))
    v = violations(minimal(solver={"dissipation": {"kind": "fractional", "alpha_": 0.3}}))
    assert any("'alpha_'" in s for s in v)
    v = violations(minimal(modulus={"delta": 0.785, "beta": 0.7, "Hamp": 1.0}))
    assert any("'Hamp'" in s for s in v)


def test_parse_problems_are_reported_together():
    d = minimal(extra=1, seed=1.5)
    d["solver"]["cfl"] = 2.0
    v = violations(d)
    assert any("cfl" in s for s in v)
    assert any("'extra'" in s for s in v)
    assert any("seed" in s for s in v)


def test_validation_problems_are_reported_together():
    v = violations(minimal(seed=-1, initial_data={"preset": "nope", "amplitude": 1.0}))
    assert any("nope" in s for s in v) and any("seed" in s for s in v)


@pytest.mark.parametrize("mutation,needle", [
    ({"scenario": "bogus"}, "scenario"),
    ({"solver": {"dissipation": {"kind": "fractional", "alpha": 0.7}}}, "α"),
    ({"solver": {"n": 100}}, "solver"),
    ({"solver": {"n": 64.5}}, "integer"),
    ({"epsilon_ladder": [-1.0]}, "epsilon_ladder"),
    ({"scenario": "blowup-probe", "alphas": [0.3, 0.45]}, "probe α"),
    ({"scenario": "blowup-probe"}, "alphas"),
    ({"scenario": "verify", "suites": ["nope"]}, "nope"),
    ({"scenario": "slightly-supercritical"}, "log_supercritical"),
    ({"initial_data": {"coefficients": [[1, 2]]}}, "coefficients"),
])
def test_field_level_violations(mutation, needle):
    d = minimal()
    for k, v in mutation.items():
        if k == "solver":
            d["solver"] = {**d["solver"], **v}
        else:
            d[k] = v
    assert any(needle in s for s in violations(d))


def test_supercritical_delta_constraint():
    d = {"scenario": "slightly-supercritical",
         "solver": {"dissipation": {"kind": "log_supercritical"}, "n": 64},
         "modulus": {"kappa": 1e6},
         "initial_data": {"preset": "two-mode", "amplitude": 0.005}}
    assert any("δ(B) ≤ σ/2" in s for s in violations(d))


def test_load_rejects_duplicates_nan_and_bad_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"scenario": "verify", "scenario": "verify"}')
    with pytest.raises(ConfigError, match="duplicate"):
        load_config(p)
    p.write_text('{"scenario": NaN}')
    with pytest.raises(ConfigError, match="non-finite"):
        load_config(p)
    p.write_text("{")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(p)


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_load_and_round_trip(path, tmp_path):
    cfg = load_config(path)
    assert cfg.scenario in SCENARIOS
    assert load_config(write_config(cfg, tmp_path / "out.json")) == cfg


nonneg = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def run_configs(draw):
    alpha = draw(st.floats(min_value=0.05, max_value=0.45))
    beta = draw(st.floats(min_value=1 - 2 * alpha + 1e-6, max_value=0.999))
    coeffs = draw(st.one_of(st.none(), st.lists(
        st.tuples(st.integers(0, 8), st.floats(-2, 2), st.floats(-2, 2)), min_size=1, max_size=4)))
    initial = ({"coefficients": [list(r) for r in coeffs]} if coeffs is not None else
               {"preset": draw(st.sampled_from(sorted(PRESETS))), "amplitude": draw(st.floats(0.01, 3.0)),
                "scale": draw(st.one_of(st.none(), st.floats(0.1, 10.0)))})
    return {
        "scenario": "eventual-regularization",
        "solver": {"dissipation": {"kind": "fractional", "alpha": alpha},
                   "n": draw(st.sampled_from([16, 64, 256])),
                   "epsilon": draw(nonneg), "dt_initial": draw(st.floats(1e-4, 0.1)),
                   "cfl": draw(st.floats(0.05, 0.95)), "t_end": draw(st.floats(0.0, 10.0)),
                   "record_every": draw(st.integers(1, 50))},
        "modulus": {"H_amp": draw(st.one_of(st.none(), st.floats(0.1, 5.0))),
                    "delta": draw(st.floats(0.01, 3.0)), "beta": beta},
        "initial_data": initial,
        "seed": draw(st.integers(0, 2**31)),
        "output_dir": draw(st.text(st.characters(categories=["L", "N"]), min_size=1, max_size=12)),
        "epsilon_ladder": draw(st.lists(nonneg, min_size=1, max_size=5)),
    }


@settings(max_examples=60, deadline=None)
@given(run_configs())
def test_round_trip_is_lossless(data):
    cfg = config_from_dict(data)
    again = config_from_dict(json.loads(cfg.to_json()))
    assert again == cfg
    assert again.to_json() == cfg.to_json()
