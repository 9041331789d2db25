"""Pseudospectral time stepping for ``theta_t = (H theta) theta_x - L theta + eps theta_xx``.

The linear part is diagonal in Fourier space and integrated exactly; the
quadratic transport term goes through the classical integrating-factor RK4
(Lawson) rule with 2/3-rule dealiasing of every product.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BlowupSuspected, StepRejected
from .spectral import GridFunction, MultiplierSpec, PeriodicGrid, refined_max

log = logging.getLogger(__name__)

TAIL_WARNING = 1e-8
MAX_HALVINGS = 10
CSV_COLUMNS = ("t", "dt", "sup", "l2", "grad_sup", "grad_l1t", "tail_fraction")

Forcing = Callable[[float, PeriodicGrid], np.ndarray]


@dataclass(frozen=True)
class SolverConfig:
    dissipation: MultiplierSpec
    grid: PeriodicGrid
    t_end: float
    epsilon: float = 0.0
    dt_initial: float = 1e-2
    cfl: float = 0.5
    record_every: int = 1
    nonlinear: bool = True
    # callable (t, grid) -> values added to the right-hand side; used by convergence tests
    forcing: Forcing | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be non-negative")
        if not 0 < self.cfl < 1:
            raise ValueError("cfl must lie in (0, 1)")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")
        if not self.dt_initial > 0:
            raise ValueError("dt_initial must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive step count")

    def linear_symbol(self) -> np.ndarray:
        k = self.grid.wavenumbers
        return self.dissipation.symbol(k) + self.epsilon * k**2


@dataclass(frozen=True)
class TimeStepReport:
    t: float
    dt: float
    sup_norm: float
    l2_norm: float
    grad_sup: float
    grad_l1t: float
    spectrum_tail: float
    step: int = 0

    @property
    def resolution_warning(self) -> bool:
        return self.spectrum_tail > TAIL_WARNING

    def csv_row(self) -> list[str]:
        vals = (self.t, self.dt, self.sup_norm, self.l2_norm, self.grad_sup, self.grad_l1t,
                self.spectrum_tail)
        return [repr(float(v)) for v in vals]


# ------------------------------------------------------------------ stepping


class _Stepper:
    """Precomputed multipliers for one (config, dt) pair."""

    def __init__(self, cfg: SolverConfig):
        g = cfg.grid
        self.cfg = cfg
        self.n = g.n
        k = g.wavenumbers
        self.symbol = cfg.linear_symbol()
        self.mask = g.dealias_mask().astype(float)
        ik = 1j * k
        hil = -1j * np.sign(k)
        if g.n % 2 == 0:
            ik[-1] = 0.0
            hil[-1] = 0.0
        self.ik = ik
        self.hil = hil
        self._dt = None

    def _factors(self, dt: float):
        if self._dt != dt:
            self._half = np.exp(-0.5 * dt * self.symbol)
            self._full = self._half * self._half
            self._dt = dt
        return self._half, self._full

    def nonlinear(self, spec: np.ndarray, t: float) -> np.ndarray:
        out = np.zeros_like(spec)
        if self.cfg.nonlinear:
            vel = np.fft.irfft(self.hil * spec, n=self.n)
            grad = np.fft.irfft(self.ik * spec, n=self.n)
            out = np.fft.rfft(vel * grad)
        if self.cfg.forcing is not None:
            out = out + np.fft.rfft(np.asarray(self.cfg.forcing(t, self.cfg.grid), dtype=float))
        return out * self.mask

    def advance(self, spec: np.ndarray, t: float, dt: float) -> np.ndarray:
        e2, e = self._factors(dt)
        a = self.nonlinear(spec, t)
        b = self.nonlinear(e2 * (spec + 0.5 * dt * a), t + 0.5 * dt)
        c = self.nonlinear(e2 * spec + 0.5 * dt * b, t + 0.5 * dt)
        d = self.nonlinear(e * spec + dt * e2 * c, t + dt)
        return e * spec + dt / 6.0 * (e * a + 2.0 * e2 * (b + c) + d)


def step(theta: GridFunction, cfg: SolverConfig, dt: float, t: float = 0.0,
         _stepper: _Stepper | None = None) -> GridFunction:
    """One integrating-factor RK4 step of size ``dt`` starting at time ``t``.

    Raises :class:`StepRejected` if the result is not finite.
    """
    stepper = _stepper or _Stepper(cfg)
    with np.errstate(over="ignore", invalid="ignore"):
        new = stepper.advance(theta.spectrum, t, dt)
    if not np.all(np.isfinite(new)):
        raise StepRejected(f"non-finite state after a step of size {dt:.3e} at t = {t:.6g}")
    return GridFunction.from_spectrum(cfg.grid, new)


def cfl_step(theta: GridFunction, cfg: SolverConfig) -> float:
    speed = float(np.max(np.abs(np.fft.irfft(-1j * np.sign(cfg.grid.wavenumbers) * theta.spectrum,
                                              n=cfg.grid.n))))
    return cfg.cfl * cfg.grid.spacing / max(1.0, speed)


# ------------------------------------------------------------------ diagnostics


def spectrum_tail(theta: GridFunction) -> float:
    """Energy fraction in the top third of the modes kept by dealiasing, ``(2n/9, n/3]``."""
    j = theta.grid.mode_index
    c = np.abs(theta.spectrum) ** 2
    c[1:] *= 2.0
    total = float(np.sum(c[j <= theta.grid.n / 3.0]))
    if total == 0.0:
        return 0.0
    top = float(np.sum(c[(j > 2.0 * theta.grid.n / 9.0) & (j <= theta.grid.n / 3.0)]))
    return top / total


def grad_sup(theta: GridFunction) -> float:
    grad = GridFunction.from_spectrum(theta.grid, theta.spectrum * 1j * theta.grid.wavenumbers)
    return refined_max(grad)[0]


def _report(theta: GridFunction, t: float, dt: float, gsup: float, l1t: float, n: int) -> TimeStepReport:
    return TimeStepReport(t, dt, refined_max(theta)[0], theta.l2_norm(), gsup, l1t,
                          spectrum_tail(theta), n)


@dataclass
class Trajectory:
    reports: list[TimeStepReport]
    final: GridFunction

    def __iter__(self):
        return iter(self.reports)

    def __len__(self):
        return len(self.reports)

    def __getitem__(self, i):
        return self.reports[i]


def run(theta0: GridFunction, cfg: SolverConfig,
        hooks: Sequence[Callable[[TimeStepReport, GridFunction], None]] = ()) -> Trajectory:
    """Integrate to ``cfg.t_end`` and return the recorded reports.

    Reports (and hook calls) happen at ``t = 0``, after every
    ``cfg.record_every`` accepted steps, and at ``t_end``.
    """
    if not np.all(np.isfinite(theta0.values)):
        raise ValueError("initial data must be finite")
    stepper = _Stepper(cfg)
    theta = GridFunction.from_spectrum(cfg.grid, theta0.spectrum * stepper.mask)
    t, steps = 0.0, 0
    gsup = grad_sup(theta)
    l1t = 0.0
    reports = [_report(theta, t, 0.0, gsup, l1t, 0)]
    warned = reports[0].resolution_warning
    if warned:
        log.warning("spectrum tail %.2e in the initial data: run is under-resolved", reports[0].spectrum_tail)
    for hook in hooks:
        hook(reports[0], theta)

    while t < cfg.t_end:
        dt = min(cfg.dt_initial, cfl_step(theta, cfg))
        last = cfg.t_end - t <= dt * (1 + 1e-12)
        if last:
            dt = cfg.t_end - t
        for _ in range(MAX_HALVINGS + 1):
            try:
                new = step(theta, cfg, dt, t, stepper)
                break
            except StepRejected:
                dt *= 0.5
                last = False
        else:
            raise BlowupSuspected(f"step rejected {MAX_HALVINGS} times at t = {t:.6g}",
                                  state=theta, trajectory=reports, t=t)
        theta = new
        t = cfg.t_end if last else t + dt
        steps += 1
        new_gsup = grad_sup(theta)
        l1t += 0.5 * dt * (gsup + new_gsup)
        gsup = new_gsup
        if steps % cfg.record_every == 0 or last:
            rep = _report(theta, t, dt, gsup, l1t, steps)
            if rep.resolution_warning and not warned:
                log.warning("spectrum tail %.2e at t = %.4g: run is under-resolved", rep.spectrum_tail, t)
                warned = True
            reports.append(rep)
            for hook in hooks:
                hook(rep, theta)
    return Trajectory(reports, theta)


@dataclass(frozen=True)
class GradientSummary:
    max_grad: float
    grad_l1t: float


def grad_sup_monitor(trajectory: Iterable[TimeStepReport]) -> GradientSummary:
    """Running maximum of ``||theta_x||_inf`` and its time integral up to the last report."""
    reports = list(trajectory)
    if not reports:
        return GradientSummary(0.0, 0.0)
    return GradientSummary(max(r.grad_sup for r in reports), reports[-1].grad_l1t)


def write_csv(trajectory: Iterable[TimeStepReport], path=None) -> str:
    """Serialize reports; returns the text and writes it to ``path`` if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in trajectory:
        w.writerow(r.csv_row())
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text

