"""Run configuration: one JSON document per run, parsed strictly.

Layout::

    {
      "scenario": "eventual-regularization",
      "solver": {"dissipation": {"kind": "fractional", "alpha": 0.3}, "n": 1024,
                 "epsilon": 0.0, "dt_initial": 0.02, "cfl": 0.5, "t_end": 6.0,
                 "record_every": 10},
      "modulus": {"H_amp": null, "delta": 0.785, "beta": 0.7, ...},
      "initial_data": {"preset": "cosine-bump", "amplitude": 0.3},
      "seed": 0,
      "output_dir": "eventual",
      "epsilon_ladder": [0.01, 0.001, 0.0001, 0.0],
      "alphas": [],
      "suites": []
    }

Missing optional keys take their defaults; unknown keys are errors.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..errors import ConfigError
from ..solver import SolverConfig
from ..spectral import MultiplierSpec, PeriodicGrid
from .presets import PRESETS

SCENARIOS = ("eventual-regularization", "slightly-supercritical", "blowup-probe",
             "epsilon-sweep", "verify", "kernel-table")
SUITES = ("operators", "hilbert-increment", "breakthrough", "supercritical")
SOLVER_KEYS = ("dissipation", "n", "epsilon", "dt_initial", "cfl", "t_end", "record_every")
DEFAULT_LADDER = (1e-2, 1e-3, 1e-4, 0.0)


@dataclass(frozen=True)
class ModulusParams:
    h_amp: float | None = None
    delta: float | None = None
    beta: float | None = None
    kappa: float | None = None
    gamma: float | None = None
    sigma: float | None = None

    JSON_NAMES = {"h_amp": "H_amp"}

    def to_dict(self) -> dict:
        return {self.JSON_NAMES.get(f.name, f.name): getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class InitialData:
    preset: str | None = "cosine-bump"
    amplitude: float = 1.0
    scale: float | None = None
    coefficients: tuple | None = None  # rows (k, a, b) for a cos(kx) + b sin(kx)

    def to_dict(self) -> dict:
        coeffs = None if self.coefficients is None else [list(r) for r in self.coefficients]
        return {"preset": self.preset, "amplitude": self.amplitude, "scale": self.scale,
                "coefficients": coeffs}


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    solver: SolverConfig
    modulus: ModulusParams = field(default_factory=ModulusParams)
    initial_data: InitialData = field(default_factory=InitialData)
    seed: int = 0
    output_dir: str = "run"
    epsilon_ladder: tuple = DEFAULT_LADDER
    alphas: tuple = ()
    suites: tuple = ()

    @property
    def alpha(self) -> float | None:
        d = self.solver.dissipation
        return d.alpha if d.kind == "fractional" else None

    def with_output_dir(self, path) -> "RunConfig":
        return replace(self, output_dir=str(path))

    def to_dict(self) -> dict:
        s = self.solver
        return {
            "scenario": self.scenario,
            "solver": {"dissipation": s.dissipation.to_dict(), "n": s.grid.n, "epsilon": s.epsilon,
                       "dt_initial": s.dt_initial, "cfl": s.cfl, "t_end": s.t_end,
                       "record_every": s.record_every},
            "modulus": self.modulus.to_dict(),
            "initial_data": self.initial_data.to_dict(),
            "seed": self.seed,
            "output_dir": self.output_dir,
            "epsilon_ladder": list(self.epsilon_ladder),
            "alphas": list(self.alphas),
            "suites": list(self.suites),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


# ------------------------------------------------------------------ parsing


def _reject_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ConfigError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _reject_constant(name):
    raise ConfigError(f"non-finite number {name} is not allowed")


def _check_keys(d, allowed, where, problems):
    if not isinstance(d, dict):
        problems.append(f"{where} must be an object")
        return False
    for k in d:
        if k not in allowed:
            problems.append(f"unknown key {k!r} in {where}")
    return True


def _number(d, key, where, problems, default=None, integer=False):
    v = d.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and not isinstance(v, int)):
        problems.append(f"{where}.{key} must be {'an integer' if integer else 'a number'}")
        return default
    return int(v) if integer else float(v)


def _number_list(d, key, where, problems, default=()):
    v = d.get(key, list(default))
    if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
        problems.append(f"{key} must be a list of numbers")
        return tuple(default)
    return tuple(float(x) for x in v)


def config_from_dict(data: dict) -> RunConfig:
    """Build a :class:`RunConfig`; raises :class:`ConfigError` listing every problem."""
    problems: list[str] = []
    top = {f.name for f in fields(RunConfig)}
    if not _check_keys(data, top, "config", problems):
        raise ConfigError(problems)
    scenario = data.get("scenario")
    if scenario not in SCENARIOS:
        problems.append(f"scenario must be one of {', '.join(SCENARIOS)}")

    sd = data.get("solver", {})
    solver = None
    if _check_keys(sd, SOLVER_KEYS, "solver", problems):
        dd = sd.get("dissipation", {"kind": "fractional", "alpha": 0.3})
        try:
            if not _check_keys(dd, ("kind", "alpha", "epsilon", "parts"), "solver.dissipation", problems):
                raise ValueError("expected an object")
            diss = MultiplierSpec.from_dict(dd)
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"solver.dissipation is invalid: {exc}")
            diss = None
        n = _number(sd, "n", "solver", problems, 1024, integer=True)
        kwargs = {k: _number(sd, k, "solver", problems, d) for k, d in
                  (("epsilon", 0.0), ("dt_initial", 1e-2), ("cfl", 0.5), ("t_end", 1.0))}
        kwargs["record_every"] = _number(sd, "record_every", "solver", problems, 10, integer=True)
        if diss is not None:
            try:
                solver = SolverConfig(diss, PeriodicGrid(n), **kwargs)
            except (ValueError, TypeError) as exc:
                problems.append(f"solver: {exc}")

    md = data.get("modulus", {})
    modulus = ModulusParams()
    names = {ModulusParams.JSON_NAMES.get(f.name, f.name): f.name for f in fields(ModulusParams)}
    if _check_keys(md, names, "modulus", problems):
        modulus = ModulusParams(**{names[k]: _number(md, k, "modulus", problems) for k in md if k in names})

    idd = data.get("initial_data", {})
    initial = InitialData()
    if _check_keys(idd, ("preset", "amplitude", "scale", "coefficients"), "initial_data", problems):
        coeffs = idd.get("coefficients")
        if coeffs is not None:
            ok = isinstance(coeffs, list) and all(
                isinstance(r, list) and len(r) == 3 and all(isinstance(v, (int, float)) for v in r)
                for r in coeffs)
            if not ok:
                problems.append("initial_data.coefficients must be rows [k, a, b]")
                coeffs = None
            else:
                coeffs = tuple((int(r[0]), float(r[1]), float(r[2])) for r in coeffs)
        initial = InitialData(
            preset=idd.get("preset", None if coeffs is not None else "cosine-bump"),
            amplitude=_number(idd, "amplitude", "initial_data", problems, 1.0),
            scale=_number(idd, "scale", "initial_data", problems),
            coefficients=coeffs,
        )

    seed = _number(data, "seed", "config", problems, 0, integer=True)
    output_dir = data.get("output_dir", "run")
    if not isinstance(output_dir, str) or not output_dir:
        problems.append("output_dir must be a non-empty string")
    suites = data.get("suites", [])
    if not isinstance(suites, list) or not all(isinstance(s, str) for s in suites):
        problems.append("suites must be a list of names")
        suites = []
    if problems:
        raise ConfigError(problems)
    cfg = RunConfig(scenario, solver, modulus, initial, seed, output_dir,
                    _number_list(data, "epsilon_ladder", "config", problems, DEFAULT_LADDER),
                    _number_list(data, "alphas", "config", problems), tuple(suites))
    problems.extend(validate_config(cfg))
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicates, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return config_from_dict(data)


def write_config(cfg: RunConfig, path) -> Path:
    path = Path(path)
    path.write_text(cfg.to_json())
    return path


# ------------------------------------------------------------------ validation


def _in_range(problems, name, value, lo, hi, lo_open=True, hi_open=True):
    if value is None:
        return
    ok_lo = value > lo if lo_open else value >= lo
    ok_hi = value < hi if hi_open else value <= hi
    if not (math.isfinite(value) and ok_lo and ok_hi):
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        problems.append(f"{name} must lie in {lb}{lo:g}, {hi:g}{rb}, got {value:g}")


def validate_config(cfg: RunConfig) -> list[str]:
    """Field-level violations; an empty list means the config is runnable."""
    problems: list[str] = []
    if cfg.scenario not in SCENARIOS:
        problems.append(f"scenario must be one of {', '.join(SCENARIOS)}")
    s, m, init = cfg.solver, cfg.modulus, cfg.initial_data
    kind = s.dissipation.kind
    alpha = cfg.alpha

    if cfg.scenario in ("eventual-regularization", "blowup-probe", "epsilon-sweep") and kind != "fractional":
        problems.append(f"scenario {cfg.scenario} needs fractional dissipation")
    if cfg.scenario == "slightly-supercritical" and kind != "log_supercritical":
        problems.append("scenario slightly-supercritical needs log_supercritical dissipation")
    if cfg.scenario == "eventual-regularization" and alpha is not None:
        _in_range(problems, "α", alpha, 0.0, 0.5)
        if m.beta is None:
            problems.append("eventual-regularization needs modulus.beta")
        elif 0 < alpha < 0.5:
            if not m.beta > 1 - 2 * alpha:
                problems.append(f"β must exceed 1−2α = {1 - 2 * alpha:.4g}")
            if not m.beta < 1:
                problems.append("β must be below 1")
        if not cfg.epsilon_ladder:
            problems.append("epsilon_ladder must not be empty")
    if cfg.scenario == "blowup-probe":
        if len(cfg.alphas) != 2:
            problems.append("blowup-probe needs alphas = [probe alpha, comparison alpha]")
        else:
            _in_range(problems, "probe α", cfg.alphas[0], 0.0, 0.25)
            _in_range(problems, "comparison α", cfg.alphas[1], 0.0, 1.0, hi_open=False)
    if cfg.scenario == "epsilon-sweep":
        if not cfg.alphas:
            problems.append("epsilon-sweep needs a non-empty alphas list")
        for a in cfg.alphas:
            _in_range(problems, "α", a, 0.0, 1.0, hi_open=False)
        if not cfg.epsilon_ladder:
            problems.append("epsilon_ladder must not be empty")
    if cfg.scenario == "verify":
        if not cfg.suites:
            problems.append(f"verify needs suites from {', '.join(SUITES)}")
        for name in cfg.suites:
            if name not in SUITES:
                problems.append(f"unknown suite {name!r}")
    if cfg.scenario == "kernel-table" and m.sigma is None:
        problems.append("kernel-table needs modulus.sigma")

    for e in cfg.epsilon_ladder:
        if not (math.isfinite(e) and e >= 0):
            problems.append(f"epsilon_ladder entries must be >= 0, got {e:g}")
    if m.h_amp is not None and not m.h_amp > 0:
        problems.append("H_amp must be positive")
    _in_range(problems, "δ", m.delta, 0.0, math.pi, hi_open=False)
    _in_range(problems, "κ", m.kappa, 0.0, math.inf)
    _in_range(problems, "γ", m.gamma, 0.0, 1.0)
    _in_range(problems, "σ", m.sigma, 0.0, 1.0, hi_open=False)
    if init.coefficients is None:
        if init.preset not in PRESETS:
            problems.append(f"unknown preset {init.preset!r}")
    elif init.preset is not None:
        problems.append("give either initial_data.preset or initial_data.coefficients, not both")
    if not math.isfinite(init.amplitude):
        problems.append("amplitude must be finite")
    if init.scale is not None and not init.scale > 0:
        problems.append("scale must be positive")
    if cfg.seed < 0:
        problems.append("seed must be non-negative")
    if cfg.scenario == "slightly-supercritical" and not problems:
        problems.extend(_supercritical_violations(cfg))
    return problems


def _supercritical_violations(cfg: RunConfig) -> list[str]:
    # delta(B) decreases in B, so checking B = 1 covers every B the search can select
    from ..moduli import delta_of_b
    from ..verifier import default_modulus_setup, load_calibration

    cal = load_calibration()["supercritical"]
    sigma = cfg.modulus.sigma or cal["sigma"]
    kappa = cfg.modulus.kappa or cal["kappa"]
    _, minorant = default_modulus_setup(sigma)
    d = delta_of_b(minorant, 1.0, kappa)
    if d > sigma / 2:
        return [f"δ(B) ≤ σ/2 fails: δ(1) = {d:.4g} > σ/2 = {sigma / 2:.4g}; lower κ"]
    return []
