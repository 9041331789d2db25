"""Scenario runners: each turns a :class:`RunConfig` into files plus a :class:`RunResult`."""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import ActiveScalarError, BlowupSuspected, SearchExhausted
from ..moduli import (KiselevModulus, SupercriticalModulus, select_initial_b, xi0_evolution,
                      xi0_extinction_time)
from ..quadrature import CutoffFunction, build_kernel_table, minorant_constants
from ..solver import TAIL_WARNING, SolverConfig, run, write_csv
from ..spectral import GridFunction, MultiplierSpec
from ..verifier import (ObedienceMonitor, default_modulus_setup, kiselev_schedule, load_calibration,
                        run_suites, verification_report)
from . import plots
from .config import RunConfig, config_from_dict
from .presets import from_coefficients, preset

OUTPUT_ROOT_ENV = "ACTIVESCALAR_OUTPUT_ROOT"
DEFAULT_DELTA = math.pi / 4  # one eighth of the period
HOLDER_SLACK = 1e-3
GROWTH_RATIO = 10.0
ORDERING_SLACK = 1e-3
SNAPSHOTS = 5


@dataclass
class RunResult:
    config: RunConfig
    output_dir: Path
    trajectory_csv: list = field(default_factory=list)
    verification_json: str | None = None
    measured: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    plots: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    plot_data: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(self.checks.values())

    def to_dict(self) -> dict:
        return _clean({
            "config": self.config.to_dict(),
            "trajectory_csv": list(self.trajectory_csv),
            "verification_json": self.verification_json,
            "measured": self.measured,
            "checks": self.checks,
            "passed": self.passed,
            "plots": list(self.plots),
            "errors": list(self.errors),
        })


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def dump_json(obj, path: Path) -> str:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")
    return path.name


def resolve_output_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    if not out.is_absolute():
        out = Path(os.environ.get(OUTPUT_ROOT_ENV, ".")) / out
    out.mkdir(parents=True, exist_ok=True)
    return out


def initial_field(cfg: RunConfig, grid=None) -> GridFunction:
    grid = grid or cfg.solver.grid
    init = cfg.initial_data
    if init.coefficients is not None:
        return from_coefficients(grid, init.coefficients)
    return preset(init.preset, grid, init.amplitude, init.scale, cfg.seed)


class _Snapshots:
    """Hook keeping every ``stride``-th state for plotting."""

    def __init__(self, stride: int):
        self.stride = max(1, stride)
        self.items: list = []
        self._count = 0

    def __call__(self, report, theta):
        if self._count % self.stride == 0:
            self.items.append((report.t, theta.values.copy()))
        self._count += 1


def _stride(cfg: SolverConfig) -> int:
    expected = cfg.t_end / cfg.dt_initial / cfg.record_every
    return max(1, int(expected // SNAPSHOTS))


def _run_guarded(theta0, solver, hooks, result: RunResult, label: str):
    """Run the solver; a suspected blow-up is recorded and its partial trajectory returned."""
    try:
        traj = run(theta0, solver, hooks)
        return traj.reports, None
    except BlowupSuspected as exc:
        result.errors.append(f"{label}: {exc}")
        return exc.trajectory, exc.t


# ------------------------------------------------------------------ scenarios


def _eventual_regularization(cfg: RunConfig, out: Path, result: RunResult):
    alpha, beta = cfg.alpha, cfg.modulus.beta
    cal = load_calibration()["breakthrough"]
    c1, c2 = cal["C1"], cal["C2"]
    delta = cfg.modulus.delta or DEFAULT_DELTA
    h_max = c1 * delta ** (1 - 2 * alpha)
    h_amp = cfg.modulus.h_amp or h_max
    km = KiselevModulus(h_amp, delta, beta, delta)
    schedule = kiselev_schedule(km, alpha, c2)
    t_star = xi0_extinction_time(delta, alpha, c2)
    bound = h_amp / delta**beta + HOLDER_SLACK
    theta0 = initial_field(cfg)
    result.measured.update(alpha=alpha, beta=beta, delta=delta, H_amp=h_amp, C1=c1, C2=c2,
                           t_star=t_star, holder_bound=bound,
                           initial_min=float(theta0.values.min()))
    result.checks["amplitude_hypothesis"] = h_amp <= h_max * (1 + 1e-12)

    rows, gaps_plot, diag = [], {}, {}
    for i, eps in enumerate(cfg.epsilon_ladder):
        solver = replace(cfg.solver, epsilon=eps)
        monitor = ObedienceMonitor(schedule, holder_beta=beta)
        snaps = _Snapshots(_stride(solver))
        reports, failed_at = _run_guarded(theta0, solver, [monitor, snaps], result, f"epsilon={eps:g}")
        result.trajectory_csv.append(write_csv_named(reports, out / f"trajectory_eps{i}.csv"))
        times = np.array([t for t, _ in monitor.reports])
        gaps = np.array([r.gap for _, r in monitor.reports])
        statuses = [r.status for _, r in monitor.reports]
        xi0 = np.array([xi0_evolution(delta, alpha, c2, t) for t in times])
        hit = np.flatnonzero(xi0 == 0.0)
        if hit.size and hit[0] > 0:
            t_hit = float(times[hit[0]])
            interval = float(times[hit[0]] - times[hit[0] - 1])
            hit_ok = 0.0 <= t_hit - t_star <= interval
        else:
            t_hit, interval, hit_ok = None, None, False
        post = [h for t, h in monitor.holder if t >= t_star]
        holder = max(post) if post else None
        rows.append({
            "epsilon": eps, "worst_gap": float(gaps.max()) if gaps.size else None,
            "all_obey": all(s == "obeys" for s in statuses), "t_star_measured": t_hit,
            "report_interval": interval, "t_star_hit": hit_ok, "holder_post": holder,
            "holder_ok": holder is not None and holder <= bound,
            "grad_sup_max": max(r.grad_sup for r in reports),
            "max_spectrum_tail": max(r.spectrum_tail for r in reports),
            "completed": failed_at is None,
        })
        gaps_plot[f"eps={eps:g}"] = (times, gaps)
        diag[f"eps={eps:g}"] = reports
        if i == len(cfg.epsilon_ladder) - 1:
            result.plot_data["snapshots"] = snaps.items
    result.measured["ladder"] = rows
    worst = [r["worst_gap"] for r in rows if r["worst_gap"] is not None]
    holders = [r["holder_post"] for r in rows if r["holder_post"] is not None]
    result.measured["worst_gap"] = max(worst) if worst else None
    result.measured["holder_post_max"] = max(holders) if holders else None
    result.measured["T2_estimate"] = max((r["t_star_measured"] or math.inf) for r in rows)
    result.checks["gap_negative"] = all(r["all_obey"] for r in rows)
    result.checks["xi0_extinction"] = all(r["t_star_hit"] for r in rows)
    result.checks["holder_after_t_star"] = all(r["holder_ok"] for r in rows)
    result.checks["completed"] = all(r["completed"] for r in rows)
    t_grid = np.linspace(0.0, cfg.solver.t_end, 200)
    result.plot_data.update(diagnostics=diag, gaps=gaps_plot, t_star=t_star,
                            xi0=(t_grid, xi0_evolution(delta, alpha, c2, t_grid)))


def _supercritical_setup(cfg: RunConfig):
    cal = load_calibration()["supercritical"]
    m = cfg.modulus
    sigma = m.sigma or cal["sigma"]
    kappa = m.kappa or cal["kappa"]
    gamma = m.gamma or cal["gamma"]
    _, minorant = default_modulus_setup(sigma)
    return minorant, kappa, gamma


def _slightly_supercritical(cfg: RunConfig, out: Path, result: RunResult):
    minorant, kappa, gamma = _supercritical_setup(cfg)
    theta0 = initial_field(cfg)
    m_inf = float(np.max(np.abs(theta0.values)))
    result.measured.update(kappa=kappa, gamma=gamma, sigma=minorant.sigma, sup_theta0=m_inf)
    try:
        b = select_initial_b(theta0, m_inf, minorant, kappa, gamma)
    except SearchExhausted as exc:
        result.errors.append(str(exc))
        result.checks["b_selected"] = False
        return
    sm = SupercriticalModulus(minorant, b, kappa, gamma)
    monitor = ObedienceMonitor(lambda t: sm)
    snaps = _Snapshots(_stride(cfg.solver))
    reports, failed_at = _run_guarded(theta0, cfg.solver, [monitor, snaps], result, "supercritical")
    result.trajectory_csv.append(write_csv_named(reports, out / "trajectory.csv"))
    gaps = [r.gap for _, r in monitor.reports]
    grads = [r.grad_sup for r in reports]
    result.measured.update(B=b, delta_B=sm.delta_b, omega_B_sigma=float(sm.value(minorant.sigma)),
                           grad_sup_max=max(grads), worst_gap=max(gaps),
                           max_spectrum_tail=max(r.spectrum_tail for r in reports),
                           t_final=reports[-1].t)
    result.checks["b_selected"] = True
    result.checks["completed"] = failed_at is None and reports[-1].t == cfg.solver.t_end
    result.checks["gradient_below_B"] = all(g < b for g in grads)
    result.checks["resolved"] = all(r.spectrum_tail <= TAIL_WARNING for r in reports)
    result.checks["obeys_omega_B"] = all(r.status == "obeys" for _, r in monitor.reports)
    result.plot_data.update(diagnostics={"supercritical": reports}, snapshots=snaps.items,
                            gaps={"omega_B": ([t for t, _ in monitor.reports], gaps)})


def _resolved_horizon(reports) -> float:
    """Last report time before the first under-resolved report."""
    last = reports[0].t
    for r in reports:
        if r.spectrum_tail > TAIL_WARNING:
            break
        last = r.t
    return last


def _blowup_probe(cfg: RunConfig, out: Path, result: RunResult):
    theta0 = initial_field(cfg)
    runs = {}
    for alpha in cfg.alphas:
        solver = replace(cfg.solver, dissipation=MultiplierSpec.fractional(alpha))
        reports, failed_at = _run_guarded(theta0, solver, [], result, f"alpha={alpha:g}")
        name = write_csv_named(reports, out / f"trajectory_alpha{len(runs)}.csv")
        result.trajectory_csv.append(name)
        runs[alpha] = (reports, failed_at)
    probe, other = cfg.alphas
    horizon = min(_resolved_horizon(r) for r, _ in runs.values())
    curves, growth = {}, {}
    for alpha, (reports, _) in runs.items():
        t = np.array([r.t for r in reports])
        g = np.array([r.grad_sup for r in reports]) / reports[0].grad_sup
        curves[f"alpha={alpha:g}"] = (t, g)
        growth[alpha] = float(np.interp(horizon, t, g))
    ratio = growth[probe] / growth[other]
    result.measured.update(
        matched_time=horizon, growth_probe=growth[probe], growth_comparison=growth[other],
        growth_ratio=ratio, probe_alpha=probe, comparison_alpha=other,
        time_to_rejection={f"{a:g}": fa for a, (_, fa) in runs.items()},
        grad_sup_max={f"{a:g}": max(r.grad_sup for r in rep) for a, (rep, _) in runs.items()},
    )
    result.checks["growth_ordering"] = ratio >= GROWTH_RATIO
    result.plot_data.update(growth=curves, matched_time=horizon,
                            diagnostics={k: runs[a][0] for k, a in zip(curves, runs)})


def _sweep_cell(cfg_dict: dict, alpha: float, eps: float, path: str) -> dict:
    cfg = config_from_dict(cfg_dict)
    solver = replace(cfg.solver, dissipation=MultiplierSpec.fractional(alpha), epsilon=eps)
    cell = {"alpha": alpha, "epsilon": eps, "csv": Path(path).name, "error": None}
    try:
        reports = run(initial_field(cfg), solver).reports
    except BlowupSuspected as exc:
        reports = exc.trajectory
        cell["error"] = str(exc)
    except ActiveScalarError as exc:
        reports = []
        cell["error"] = str(exc)
    write_csv(reports, path)
    cell["times"] = [r.t for r in reports]
    cell["grad"] = [r.grad_sup for r in reports]
    cell["grad_sup_max"] = max(cell["grad"]) if reports else None
    cell["grad_sup_final"] = cell["grad"][-1] if reports else None
    return cell


def _epsilon_ordering(cells) -> bool:
    """``grad_sup`` never increases with ``epsilon`` at common times (relative slack 1e-3)."""
    ladder = sorted((c for c in cells if c["times"]), key=lambda c: c["epsilon"])
    for lo, hi in zip(ladder[:-1], ladder[1:]):
        t_end = min(lo["times"][-1], hi["times"][-1])
        t = [s for s in lo["times"] if s <= t_end]
        g_hi = np.interp(t, hi["times"], hi["grad"])
        g_lo = np.interp(t, lo["times"], lo["grad"])
        if np.any(g_hi > g_lo * (1 + ORDERING_SLACK)):
            return False
    return True


def _epsilon_sweep(cfg: RunConfig, out: Path, result: RunResult, workers: int = 1):
    jobs = [(alpha, eps, str(out / f"cell_a{i}_e{j}.csv"))
            for i, alpha in enumerate(cfg.alphas) for j, eps in enumerate(cfg.epsilon_ladder)]
    d = cfg.to_dict()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_sweep_cell, *zip(*[(d, a, e, p) for a, e, p in jobs])))
    else:
        cells = [_sweep_cell(d, a, e, p) for a, e, p in jobs]
    ordering = {}
    for alpha in cfg.alphas:
        ordering[f"{alpha:g}"] = _epsilon_ordering([c for c in cells if c["alpha"] == alpha])
    result.trajectory_csv.extend(c["csv"] for c in cells)
    result.errors.extend(f"alpha={c['alpha']:g} epsilon={c['epsilon']:g}: {c['error']}"
                         for c in cells if c["error"])
    result.measured["cells"] = [{k: v for k, v in c.items() if k not in ("times", "grad")} for c in cells]
    result.measured["epsilon_ordering"] = ordering
    result.checks["epsilon_ordering"] = all(ordering.values())
    result.plot_data["growth"] = {f"a={c['alpha']:g} e={c['epsilon']:g}": (c["times"], c["grad"])
                                  for c in cells if c["times"]}


def _verify(cfg: RunConfig, out: Path, result: RunResult):
    records, fitted = run_suites(cfg.suites)
    report = verification_report(records, fitted)
    result.verification_json = dump_json(report, out / "verification.json")
    result.measured["counts"] = report["summary"]["counts"]
    result.measured["fitted"] = fitted
    for name in cfg.suites:
        result.checks[name] = True
    suite_of = _suite_index(cfg.suites, records)
    for rec, suite in zip(records, suite_of):
        if not rec.passed:
            result.checks[suite] = False
    result.plot_data["records"] = report["records"]


def _suite_index(suites, records):
    prefixes = {"operators": "operator_", "hilbert-increment": "hilbert_increment", "breakthrough": "breakthrough_",
                "supercritical": "supercritical_"}
    out = []
    for r in records:
        out.append(next((s for s in suites if r.name.startswith(prefixes[s])), suites[0]))
    return out


def _kernel_table(cfg: RunConfig, out: Path, result: RunResult):
    sigma = cfg.modulus.sigma
    rows, table, minorant = kernel_table_rows(sigma)
    path = out / "kernel_table.csv"
    write_kernel_csv(rows, path)
    result.trajectory_csv.append(path.name)
    near = rows[:, 0] < 2 * sigma
    ratio = rows[:, 5]
    result.measured.update(sigma=sigma, c_bound=table.c_bound, c0=minorant.c0, a=minorant.a,
                           radii=int(rows.shape[0]))
    result.checks["kernel_positive"] = bool(np.all(rows[near, 1] > 0))
    result.checks["two_sided_bound"] = bool(
        np.all(ratio <= table.c_bound * (1 + 1e-12))
        and np.all(ratio[near] >= (1 - 1e-12) / table.c_bound))
    result.checks["minorant_monotone"] = minorant.is_monotone(minorant.a, minorant.scan_grid(10))
    result.plot_data["kernel_rows"] = rows


def kernel_table_rows(sigma: float):
    cutoff = CutoffFunction(sigma)
    table = build_kernel_table(cutoff)
    minorant = minorant_constants(table, cutoff)
    return table.rows(minorant), table, minorant


def write_kernel_csv(rows: np.ndarray, path) -> None:
    lines = ["y,K,K1,K2,m,bound_ratio"]
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_csv_named(reports, path: Path) -> str:
    write_csv(reports, path)
    return path.name


RUNNERS = {
    "eventual-regularization": _eventual_regularization,
    "slightly-supercritical": _slightly_supercritical,
    "blowup-probe": _blowup_probe,
    "epsilon-sweep": _epsilon_sweep,
    "verify": _verify,
    "kernel-table": _kernel_table,
}


def run_scenario(cfg: RunConfig, plots_enabled: bool = True, workers: int = 1) -> RunResult:
    """Run ``cfg``, write its files under the output directory and return the result.

    Writes ``config.json`` (the echo), the trajectory CSVs, ``verification.json``
    for verify runs, ``result.json`` and, if enabled, SVG plots.
    """
    out = resolve_output_dir(cfg)
    result = RunResult(cfg, out)
    (out / "config.json").write_text(cfg.to_json())
    runner = RUNNERS[cfg.scenario]
    if cfg.scenario == "epsilon-sweep":
        runner(cfg, out, result, workers)
    else:
        runner(cfg, out, result)
    if plots_enabled:
        emit_plots(result)
    dump_json(result.to_dict(), out / "result.json")
    return result


def emit_plots(result: RunResult) -> list[str]:
    """Write whichever figures the result has data for; returns file names."""
    out, data = result.output_dir, result.plot_data
    names = []
    if "diagnostics" in data:
        names.append(plots.plot_diagnostics(data["diagnostics"], out / "diagnostics.svg"))
    if "snapshots" in data:
        names.append(plots.plot_snapshots(result.config.solver.grid.points, data["snapshots"],
                                          out / "snapshots.svg"))
    if "gaps" in data:
        names.append(plots.plot_gap(data["gaps"], out / "gap.svg", data.get("xi0"), data.get("t_star")))
    if "growth" in data:
        names.append(plots.plot_growth(data["growth"], out / "growth.svg", data.get("matched_time")))
    if "records" in data:
        names.append(plots.plot_margins(data["records"], out / "margins.svg"))
    if "kernel_rows" in data:
        names.append(plots.plot_kernel(data["kernel_rows"], out / "kernel.svg"))
    result.plots = names
    return names
