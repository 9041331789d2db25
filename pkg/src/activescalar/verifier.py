"""Numerical checks of the inequalities behind modulus preservation.

Every check produces an :class:`InequalityRecord`. Constants that the
analysis only asserts to exist are fitted here and frozen in
``data/calibration.json``; a later failure against the frozen values means
the code changed, not that an estimate is false.

Hilbert-type integrals use the periodic kernel ``cot(u/2)/2`` in place of the
line kernel ``1/u``. The truncated pieces are Fourier multipliers, using

    sin(k u) cot(u/2) = 1 + 2 sum_{j<k} cos(j u) + cos(k u),

so ``int_0^r (f(x-u) - f(x+u)) cot(u/2)/2 du`` is exact on band-limited fields.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable

import numpy as np

from .errors import ConstructionFailed
from .extremal import ExtremalPair, make_extremal_pair
from .moduli import (BreakthroughReport, KiselevModulus, SupercriticalModulus, check_obedience,
                     dissipation_d_alpha, dissipation_d_b, holder_seminorm, xi0_evolution)
from .quadrature import (KernelTable, Minorant, apply_nonlocal, build_kernel_table, minorant_constants,
                         pv_fractional_laplacian, quad)
from .spectral import (GridFunction, MultiplierSpec, PeriodicGrid, apply_multiplier, evaluate,
                       hilbert_transform)

__all__ = [
    "InequalityRecord", "ExtremalPair", "make_extremal_pair", "verify_lemma_2_7",
    "verify_breakthrough_inequality", "verify_section_3_3", "monitor_trajectory",
    "load_calibration", "default_modulus_setup",
]

IDENTITY_TOL = 1e-8
FIT_TOL = 1e-3


# ------------------------------------------------------------------- records


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {k: _jsonable(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(w) for w in v]
    return v


@dataclass
class InequalityRecord:
    """``lhs <= rhs`` (``relation='le'``), ``lhs < rhs`` (``'lt'``) or ``lhs == rhs`` (``'eq'``).

    ``margin = rhs - lhs``. A ``le`` record passes iff ``margin >= -tolerance``,
    an ``lt`` record iff ``margin > 0`` and an ``eq`` record iff ``|margin| <= tolerance``.
    """

    name: str
    lhs: float
    rhs: float
    params: dict = field(default_factory=dict)
    relation: str = "le"
    tolerance: float = 0.0

    @property
    def margin(self) -> float:
        if math.isinf(self.rhs) and math.isinf(self.lhs):
            return 0.0
        return float(self.rhs - self.lhs)

    @property
    def verdict(self) -> str:
        m = self.margin
        if self.relation == "lt":
            ok = m > 0
        elif self.relation == "eq":
            ok = abs(m) <= self.tolerance
        else:
            ok = m >= -self.tolerance
        return "pass" if ok else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return _jsonable({"name": self.name, "lhs": float(self.lhs), "rhs": float(self.rhs),
                          "margin": self.margin, "relation": self.relation,
                          "tolerance": self.tolerance, "params": self.params,
                          "verdict": self.verdict})


def summarize(records: Iterable[InequalityRecord]) -> dict:
    out: dict = {}
    for r in records:
        slot = out.setdefault(r.name, {"pass": 0, "fail": 0})
        slot[r.verdict] += 1
    return out


# ------------------------------------------------------------- calibration io


@lru_cache(maxsize=1)
def load_calibration() -> dict:
    text = resources.files("activescalar").joinpath("data/calibration.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=4)
def default_modulus_setup(sigma: float = 0.1):
    """Kernel table and minorant for the logarithmic multiplier at cutoff ``sigma``."""
    from .quadrature import CutoffFunction

    table = build_kernel_table(CutoffFunction(sigma))
    return table, minorant_constants(table)


# --------------------------------------------------------- field functionals


def _truncated_hilbert_multiplier(grid, radius: float):
    """Multiplier of ``int_0^radius (f(x-u) - f(x+u)) cot(u/2)/2 du``."""
    k = grid.mode_index.astype(float)
    integral = np.empty(k.size)
    integral[0] = 0.0
    sines = np.sin(k[1:] * radius) / k[1:]
    cum = np.concatenate([[0.0], np.cumsum(sines)])  # cum[j] = sum_{i<=j} sin(i r)/i
    kk = np.arange(1, k.size)
    integral[1:] = radius + 2.0 * cum[kk - 1] + sines
    mult = -1j * integral
    mult[0] = 0.0
    if grid.n % 2 == 0:
        mult[-1] = 0.0
    return mult


def near_hilbert(theta: GridFunction, radius: float) -> GridFunction:
    return GridFunction.from_spectrum(theta.grid,
                                      theta.spectrum * _truncated_hilbert_multiplier(theta.grid, radius))


def far_hilbert(theta: GridFunction, radius: float) -> GridFunction:
    """``int_{radius <= |x-z| <= pi} theta(z) cot((x-z)/2)/2 dz`` (periodic analogue of ``int theta/(x-z)``)."""
    total = hilbert_transform(theta) * math.pi
    return total - near_hilbert(theta, radius)


def _pair_values(f: GridFunction, pair: ExtremalPair):
    vx, vy = evaluate(f, [pair.x, pair.y])
    return float(vx), float(vy)


def hilbert_increment(pair: ExtremalPair) -> float:
    hx, hy = _pair_values(hilbert_transform(pair.theta), pair)
    return hx - hy


def fractional_increment(pair: ExtremalPair, alpha: float) -> float:
    lx, ly = _pair_values(apply_multiplier(pair.theta, MultiplierSpec.fractional(alpha)), pair)
    return lx - ly


def tail_integral(modulus, lower: float) -> float:
    """``int_lower^inf omega(r)/r^2 dr``."""
    plateau = getattr(modulus, "plateau", None)
    pts = sorted(b for b in getattr(modulus, "breakpoints", ()) if b > lower)

    def f(r):
        return float(modulus.value(r)) / r**2

    if plateau is not None and plateau > lower:
        edges = [lower] + [p for p in pts if p < plateau] + [plateau]
        total = sum(quad(f, a, b, epsrel=1e-11, epsabs=0) for a, b in zip(edges[:-1], edges[1:]))
        return total + float(modulus.value(plateau)) / plateau
    if plateau is not None:
        return float(modulus.value(lower)) / lower
    return quad(f, lower, np.inf, epsrel=1e-11, epsabs=0)


def nonlocal_far_part(theta: GridFunction, table: KernelTable) -> GridFunction:
    """``L2 theta`` on the grid: trapezoid convolution with the smooth far kernel ``K2``."""
    grid = theta.grid
    j = np.arange(grid.n)
    dist = np.minimum(j, grid.n - j) * grid.spacing
    k2 = np.zeros(grid.n)
    k2[1:] = table.k2(dist[1:])
    weight = k2 * grid.spacing
    conv = np.fft.irfft(theta.spectrum * np.fft.rfft(weight), n=grid.n)
    return GridFunction(grid, values=theta.values * weight.sum() - conv)


# ---------------------------------------------------------------- Hilbert increment bound


def sign_identity_record(xi: float, alpha: float, points: int = 1000) -> InequalityRecord:
    """``1/z + xi^(2 alpha)/|z|^(1+2 alpha) >= 0`` on ``0 < |z| < xi``."""
    # open interval: |z| = xi is excluded, where the expression vanishes for z < 0
    u = np.geomspace(1e-6, 1.0, points // 2 + 1)[:-1]
    z = xi * np.concatenate([-u[::-1], u])
    az = np.abs(z)
    vals = (np.sign(z) + (xi / az) ** (2 * alpha)) / az
    worst = float(vals.min())
    return InequalityRecord("hilbert_increment_sign_identity", 0.0, worst,
                            {"xi": xi, "alpha": alpha, "points": int(z.size)}, "le", 0.0)


@dataclass
class HilbertIncrementSample:
    omega_increment: float  # Hilbert increment across the pair
    fractional_increment: float
    tail: float
    far_increment: float
    xi: float
    alpha: float
    params: dict

    @property
    def base(self) -> float:
        return self.xi ** (2 * self.alpha) * self.fractional_increment + self.xi * self.tail

    @property
    def ratio(self) -> float:
        return self.omega_increment / self.base

    @property
    def far_ratio(self) -> float:
        return abs(self.far_increment) / (self.xi * self.tail)


def hilbert_increment_sample(pair: ExtremalPair, modulus, alpha: float, pv_check: bool = False) -> HilbertIncrementSample:
    xi = pair.xi
    frac = fractional_increment(pair, alpha)
    params = {"xi": xi, "alpha": alpha, "n": pair.grid.n, "profile": pair.profile.kind}
    if isinstance(modulus, KiselevModulus):
        params.update(xi0=modulus.xi0, delta=modulus.delta, beta=modulus.beta, h_amp=modulus.h_amp)
    if pv_check:
        pv = (pv_fractional_laplacian(pair.theta, alpha, pair.x)
              - pv_fractional_laplacian(pair.theta, alpha, pair.y))
        params["pv_fractional_increment"] = pv
    far = far_hilbert(pair.theta, xi)
    fx, fy = _pair_values(far, pair)
    return HilbertIncrementSample(hilbert_increment(pair), frac, tail_integral(modulus, xi / 2), fx - fy,
                         xi, alpha, params)


def verify_lemma_2_7(pair: ExtremalPair, modulus, alpha: float, constant: float | None = None,
                     pv_check: bool = False) -> InequalityRecord:
    """``Omega <= C (xi^(2 alpha) (L x - L y) + xi int_{xi/2}^inf omega/r^2)`` with the frozen ``C``."""
    if constant is None:
        constant = load_calibration()["hilbert_increment"]["C"]
    s = hilbert_increment_sample(pair, modulus, alpha, pv_check)
    params = dict(s.params, C=constant, ratio=s.ratio)
    return InequalityRecord("hilbert_increment", s.omega_increment, constant * s.base, params, "le",
                            FIT_TOL * abs(constant * s.base))


def hilbert_increment_xis(delta: float, per_decade: int = 8, decades: int = 3):
    """Log grid in ``(10^-decades delta, delta)`` offset by half a step to avoid modulus kinks."""
    k = np.arange(per_decade * decades)
    return delta * 10.0 ** (-decades + (k + 0.5) / per_decade)


def hilbert_increment_samples(alphas=(0.1, 0.25, 0.4), xi0_fracs=(0.0, 0.01, 0.1, 1.0),
                      delta: float = math.pi / 4, per_decade: int = 8, refine: int = 1):
    """Extremal-pair samples for the Hilbert-increment fit (``refine=2`` doubles every grid)."""
    samples, skipped = [], []
    for alpha in alphas:
        beta = 1.0 - alpha
        for frac in xi0_fracs:
            km = KiselevModulus(1.0, delta, beta, frac * delta)
            for xi in hilbert_increment_xis(delta, per_decade):
                try:
                    pair = make_extremal_pair(km, xi)
                    if refine > 1:
                        pair = make_extremal_pair(km, xi, PeriodicGrid(pair.grid.n * refine))
                except ConstructionFailed as exc:
                    skipped.append({"alpha": alpha, "xi0": frac * delta, "xi": xi, "reason": str(exc)})
                    continue
                samples.append(hilbert_increment_sample(pair, km, alpha))
    return samples, skipped


def fit_hilbert_increment(samples) -> dict:
    ratios = [s.ratio for s in samples]
    far = [s.far_ratio for s in samples]
    return {"C": max(max(ratios), 0.0), "C_far": max(far), "count": len(samples)}


# ---------------------------------------------------------------- breakthrough inequality


@dataclass
class BreakthroughTerms:
    """Breakthrough numerator pieces for a unit-amplitude modulus.

    For amplitude ``H`` and rate constant ``C2`` the numerator is
    ``H^2 transport + H dissipation + H C2 rate``.
    """

    transport: float  # Omega * d omega/d xi
    dissipation: float  # (-(L x - L y) + D_alpha) / 2
    rate: float  # -d omega/dt per unit C2
    d_alpha: float
    omega_slope: float  # omega * d omega / d xi
    params: dict

    def numerator(self, h_amp: float, c2: float) -> float:
        return h_amp**2 * self.transport + h_amp * self.dissipation + h_amp * c2 * self.rate


def breakthrough_terms(pair: ExtremalPair, km: KiselevModulus, alpha: float) -> BreakthroughTerms:
    """Terms for ``km`` rescaled to ``h_amp = 1`` (``pair`` must touch ``km``)."""
    scale = 1.0 / km.h_amp
    unit = KiselevModulus(1.0, km.delta, km.beta, km.xi0)
    p = pair.scaled(scale)
    xi = p.xi
    slope = float(unit.derivative(xi))
    omega_inc = hilbert_increment(p)
    lam = fractional_increment(p, alpha)
    d_alpha = dissipation_d_alpha(unit, alpha, xi)
    if unit.xi0 > 0:
        rate = float(unit.d_dxi0(xi)) * unit.xi0 ** (1 - 2 * alpha)  # = -(d omega/dt)/C2
    else:
        rate = 0.0
    params = {"xi": xi, "alpha": alpha, "xi0": km.xi0, "delta": km.delta, "beta": km.beta,
              "n": p.grid.n}
    return BreakthroughTerms(omega_inc * slope, 0.5 * (-lam + d_alpha), rate, d_alpha,
                             float(unit.value(xi)) * slope, params)


def verify_breakthrough_inequality(pair: ExtremalPair, km: KiselevModulus, alpha: float,
                                   c1: float | None = None, c2: float | None = None,
                                   increment_constant: float | None = None) -> list[InequalityRecord]:
    """Strict negativity of the breakthrough numerator plus the two auxiliary bounds."""
    cal = load_calibration()
    c1 = cal["breakthrough"]["C1"] if c1 is None else c1
    c2 = cal["breakthrough"]["C2"] if c2 is None else c2
    big_c = cal["hilbert_increment"]["C"] if increment_constant is None else increment_constant
    if km.h_amp > c1 * km.delta ** (1 - 2 * alpha) * (1 + 1e-12):
        raise ValueError("amplitude exceeds C1 delta^(1-2 alpha)")
    t = breakthrough_terms(pair, km, alpha)
    h = km.h_amp
    params = dict(t.params, h_amp=h, C1=c1, C2=c2)
    out = [InequalityRecord("breakthrough_numerator", t.numerator(h, c2), 0.0, params, "lt")]
    out.append(InequalityRecord("breakthrough_rate", 0.25 * h * t.d_alpha, -h * c2 * t.rate,
                                params, "lt"))
    out.append(InequalityRecord("breakthrough_auxiliary", big_c * h**2 * t.omega_slope,
                                -0.25 * h * t.d_alpha, dict(params, C=big_c), "le",
                                FIT_TOL * abs(h * t.d_alpha)))
    ratio = h / km.delta ** (1 - 2 * alpha)
    amp = big_c * km.beta * ratio * (t.params["xi"] / km.delta) ** (2 * alpha + km.beta - 1)
    out.append(InequalityRecord("breakthrough_slope_amplitude", amp, 0.5, dict(params, C=big_c), "le"))
    return out


def breakthrough_samples(alphas=(0.1, 0.25, 0.3, 0.4), xi0_fracs=(0.0, 0.01, 0.1, 1.0),
                      delta: float = math.pi / 4, per_decade: int = 4):
    out = []
    for alpha in alphas:
        for frac in xi0_fracs:
            km = KiselevModulus(1.0, delta, 1.0 - alpha, frac * delta)
            for xi in hilbert_increment_xis(delta, per_decade):
                try:
                    pair = make_extremal_pair(km, xi)
                except ConstructionFailed:
                    continue
                out.append(breakthrough_terms(pair, km, alpha))
    return out


def _bisect_log(pred, lo: float, hi: float, steps: int = 60) -> float:
    """Largest value in ``[lo, hi]`` (log scale) satisfying a monotone predicate."""
    if not pred(lo):
        raise ValueError("predicate fails at the lower end")
    if pred(hi):
        return hi
    a, b = math.log(lo), math.log(hi)
    for _ in range(steps):
        mid = 0.5 * (a + b)
        if pred(math.exp(mid)):
            a = mid
        else:
            b = mid
    return math.exp(a)


def calibrate_breakthrough(terms, increment_constant: float, delta: float = math.pi / 4,
                        safety: float = 0.5) -> dict:
    """Bisect ``C2`` (rate versus quarter dissipation) then ``C1`` (full numerator and auxiliaries)."""

    def c2_ok(c2):
        return all(c2 * t.rate < -0.25 * t.d_alpha for t in terms)

    c2 = safety * _bisect_log(c2_ok, 1e-12, 1e6)

    def c1_ok(c1):
        for t in terms:
            alpha, beta = t.params["alpha"], t.params["beta"]
            h = c1 * delta ** (1 - 2 * alpha)
            if not t.numerator(h, c2) < 0:
                return False
            if increment_constant * h * t.omega_slope > -0.25 * t.d_alpha:
                return False
            if increment_constant * beta * c1 * (t.params["xi"] / delta) ** (2 * alpha + beta - 1) > 0.5:
                return False
        return True

    c1 = safety * _bisect_log(c1_ok, 1e-12, 1e6)
    return {"C1": c1, "C2": c2, "samples": len(terms)}


# ---------------------------------------------------------------- supercritical chain


def _m_tail(minorant: Minorant, xi: float) -> float:
    """``int_xi^inf m(2 eta)/eta d eta`` (the integrand vanishes beyond ``sigma``)."""
    if xi >= minorant.sigma:
        return 0.0
    edges = [xi] + [e for e in (minorant.sigma / 2,) if e > xi] + [minorant.sigma]
    return sum(quad(lambda e: float(minorant.m(2 * e)) / e, a, b, epsrel=1e-12, epsabs=0)
               for a, b in zip(edges[:-1], edges[1:]))


def omega_b_tail(sm: SupercriticalModulus, xi: float) -> float:
    """``xi int_xi^inf omega_B/eta^2`` by direct quadrature of ``omega_B``."""
    return xi * tail_integral(sm, xi)


def supercritical_scalar_records(sm: SupercriticalModulus, xi_grid, c_far: float,
                               z_points: int = 1000) -> list[InequalityRecord]:
    mn = sm.minorant
    a, c_bound = mn.a, mn.c_norm
    d = sm.delta_b
    c_small = 1.0 + 1.5 ** (-a)
    base = {"B": sm.b, "kappa": sm.kappa, "gamma": sm.gamma, "sigma": mn.sigma, "a": a}
    out = []
    for xi in xi_grid:
        if not d <= xi < mn.sigma:
            continue
        p = dict(base, xi=xi)
        m2 = float(mn.m(2 * xi))
        w = float(sm.value(xi))
        tail = _m_tail(mn, xi)
        out.append(InequalityRecord("supercritical_tail_bound", tail, m2 / a, p, "le", IDENTITY_TOL))
        lhs = omega_b_tail(sm, xi)
        rhs = w + sm.gamma * xi * tail
        out.append(InequalityRecord("supercritical_integration_by_parts", lhs, rhs, p, "eq", 1e-6 * abs(rhs)))
        if xi <= 2 * d:
            out.append(InequalityRecord("supercritical_near_delta", sm.gamma * xi * m2 / a, w, p, "le", IDENTITY_TOL))
        else:
            out.append(InequalityRecord("supercritical_lower_bound", sm.gamma * xi * m2 / 2, w, p, "le", IDENTITY_TOL))
        diss = dissipation_d_b(sm, mn, xi)
        out.append(InequalityRecord("supercritical_dissipation_lower", (2 - c_small) / c_bound * w * m2, diss,
                                    p, "le", FIT_TOL * (2 - c_small) / c_bound * w * m2))
        z = -np.linspace(2 * xi, 0, z_points + 1, endpoint=False)[1:]
        worst = float(np.max(sm.gamma * m2 - 0.25 * np.asarray(mn.m(np.abs(z)))))
        out.append(InequalityRecord("supercritical_novel_step_sign", worst, 0.0, p, "lt"))
    net = c_far * sm.gamma * (a + 2) / a - (2 - c_small) / (4 * c_bound)
    out.append(InequalityRecord("supercritical_net_sign", net, 0.0, dict(base, C_far=c_far, C=c_bound), "lt"))
    return out


@dataclass
class SupercriticalPairTerms:
    xi: float
    omega_increment: float
    slope: float
    d_b: float
    l1_increment: float
    l2_increment: float
    far_increment: float
    far_base: float
    n: int


def supercritical_pair_terms(sm: SupercriticalModulus, xi: float, table: KernelTable,
                           grid=None) -> SupercriticalPairTerms:
    pair = make_extremal_pair(sm, xi, grid)
    theta = pair.theta
    full = apply_multiplier(theta, MultiplierSpec.log_supercritical())
    far_op = nonlocal_far_part(theta, table)
    lx, ly = _pair_values(full, pair)
    l2x, l2y = _pair_values(far_op, pair)
    fx, fy = _pair_values(far_hilbert(theta, 2 * xi), pair)
    return SupercriticalPairTerms(xi, hilbert_increment(pair), float(sm.derivative(xi)),
                              dissipation_d_b(sm, sm.minorant, xi), (lx - l2x) - (ly - l2y),
                              l2x - l2y, fx - fy, omega_b_tail(sm, xi), theta.grid.n)


def supercritical_pair_records(sm: SupercriticalModulus, terms: SupercriticalPairTerms, c_far: float):
    mn = sm.minorant
    p = {"B": sm.b, "kappa": sm.kappa, "gamma": sm.gamma, "xi": terms.xi, "n": terms.n}
    out = [
        InequalityRecord("supercritical_show", terms.omega_increment * terms.slope - 0.5 * terms.d_b, 0.0, p, "lt"),
        InequalityRecord("supercritical_near_operator_ordering", terms.d_b, terms.l1_increment, p, "le",
                         FIT_TOL * abs(terms.d_b)),
        InequalityRecord("supercritical_far_operator_bound", abs(terms.l2_increment), 0.5 * terms.d_b, p, "le",
                         FIT_TOL * abs(terms.d_b)),
    ]
    if terms.xi >= sm.delta_b:
        out.append(InequalityRecord("supercritical_far_hilbert", abs(terms.far_increment) / math.pi,
                                    c_far * terms.far_base, dict(p, C_far=c_far), "le",
                                    FIT_TOL * c_far * terms.far_base))
    return out


def supercritical_pair_xis(sigma: float, per_decade: int = 8, decades: int = 3):
    k = np.arange(per_decade * decades)
    return sigma * 10.0 ** (-decades + (k + 0.5) / per_decade)


def verify_section_3_3(sm: SupercriticalModulus, xi_grid=None, table: KernelTable | None = None,
                       c_far: float | None = None, pair_xis=None) -> list[InequalityRecord]:
    """All supercritical links for ``sm``: scalar chain on ``[delta(B), sigma)`` plus extremal pairs."""
    mn = sm.minorant
    if c_far is None:
        c_far = load_calibration()["supercritical"]["C_far"]
    if xi_grid is None:
        d = sm.delta_b
        xi_grid = sorted({d, 2 * d, 4 * d, *np.geomspace(d, mn.sigma, 12, endpoint=False)})
    if table is None:
        table, _ = default_modulus_setup(mn.sigma)
    out = supercritical_scalar_records(sm, xi_grid, c_far)
    if pair_xis is None:
        pair_xis = supercritical_pair_xis(mn.sigma)
    for xi in pair_xis:
        if abs(xi - sm.delta_b) < 1e-9 * xi:
            continue
        try:
            terms = supercritical_pair_terms(sm, xi, table)
        except ConstructionFailed as exc:
            out.append(InequalityRecord("supercritical_pair_construction", 1.0, 0.0,
                                        {"xi": xi, "reason": str(exc)}, "le"))
            continue
        out.extend(supercritical_pair_records(sm, terms, c_far))
    return out


def fit_far_hilbert_constant(sm: SupercriticalModulus, table: KernelTable, pair_xis) -> float:
    worst = 0.0
    for xi in pair_xis:
        if xi < sm.delta_b:
            continue
        t = supercritical_pair_terms(sm, xi, table)
        worst = max(worst, abs(t.far_increment) / math.pi / t.far_base)
    return worst


# --------------------------------------------------------------- trajectories


class ObedienceMonitor:
    """Solver hook recording a :class:`BreakthroughReport` at every diagnostic step.

    ``schedule`` maps time to a modulus object.
    """

    def __init__(self, schedule, tolerance: float = 1e-8, holder_beta: float | None = None):
        self.schedule = schedule
        self.tolerance = tolerance
        self.holder_beta = holder_beta
        self.reports: list[tuple[float, BreakthroughReport]] = []
        self.holder: list[tuple[float, float]] = []

    def __call__(self, report, theta: GridFunction):
        modulus = self.schedule(report.t)
        self.reports.append((report.t, check_obedience(theta, modulus, self.tolerance)))
        if self.holder_beta is not None:
            self.holder.append((report.t, holder_seminorm(theta, self.holder_beta)))

    @property
    def worst_gap(self) -> float:
        return max((r.gap for _, r in self.reports), default=-math.inf)


def kiselev_schedule(km: KiselevModulus, alpha: float, c2: float):
    def schedule(t):
        return km.with_xi0(xi0_evolution(km.delta, alpha, c2, t))
    return schedule


def monitor_trajectory(states, schedule, tolerance: float = 1e-8) -> list[tuple[float, BreakthroughReport]]:
    """Check obedience along ``states`` (pairs ``(t, theta)``) against ``schedule(t)``."""
    return [(t, check_obedience(theta, schedule(t), tolerance)) for t, theta in states]


# ---------------------------------------------------------------- suites


def operator_equivalence_records(count: int = 20, alphas=(0.1, 0.25, 0.4), points: int = 10,
                                 seed: int = 0, n: int = 64, table: KernelTable | None = None,
                                 kernel_rtol: float = 1e-4, pv_rtol: float = 1e-6) -> list[InequalityRecord]:
    """Spectral operators against their real-space quadratures on random band-limited fields.

    The fractional Laplacian is compared per point against ``pv_rtol (1 + |spectral|)``; the
    logarithmic operator against ``kernel_rtol`` times the field's sup of the spectral value.
    """
    from .experiments.presets import preset

    if table is None:
        table, _ = default_modulus_setup()
    grid = PeriodicGrid(n)
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        f = preset("random-band-limited", grid, seed=seed + i)
        xs = rng.uniform(0.0, 2 * math.pi, points)
        for alpha in alphas:
            spec = apply_multiplier(f, MultiplierSpec.fractional(alpha))
            for x in xs:
                s = evaluate(spec, x)
                v = pv_fractional_laplacian(f, alpha, x)
                out.append(InequalityRecord("operator_pv_fractional", abs(v - s), pv_rtol * (1 + abs(s)),
                                            {"field": i, "alpha": alpha, "x": float(x)}, "le", 0.0))
        spec = apply_multiplier(f, MultiplierSpec.log_supercritical())
        scale = float(np.max(np.abs(spec.values)))
        for x in xs:
            s = evaluate(spec, x)
            v = apply_nonlocal(f, table, x)
            out.append(InequalityRecord("operator_log_kernel", abs(v - s), kernel_rtol * scale,
                                        {"field": i, "x": float(x)}, "le", 0.0))
    return out


def hilbert_increment_suite(constant: float | None = None, far_constant: float | None = None,
                    doubling: bool = True) -> tuple[list[InequalityRecord], dict]:
    """Sign identity per sampled separation, the frozen-constant inequality on every sample,
    the far-field bound and (optionally) stability of the fitted constant under grid doubling."""
    cal = load_calibration()["hilbert_increment"]
    constant = cal["C"] if constant is None else constant
    far_constant = cal["C_far"] if far_constant is None else far_constant
    delta = cal["delta"]
    samples, skipped = hilbert_increment_samples(delta=delta)
    out = [InequalityRecord("hilbert_increment_construction", 1.0, 0.0, s, "le") for s in skipped]
    seen = set()
    for s in samples:
        if (s.xi, s.alpha) not in seen:
            seen.add((s.xi, s.alpha))
            out.append(sign_identity_record(s.xi, s.alpha))
        p = dict(s.params, C=constant, ratio=s.ratio)
        out.append(InequalityRecord("hilbert_increment", s.omega_increment, constant * s.base, p, "le",
                                    FIT_TOL * abs(constant * s.base)))
        out.append(InequalityRecord("hilbert_increment_far_field", abs(s.far_increment),
                                    far_constant * s.xi * s.tail, dict(s.params, C_far=far_constant),
                                    "le", FIT_TOL * far_constant * s.xi * s.tail))
    fit = fit_hilbert_increment(samples)
    fitted = {"hilbert_increment_C_fit": fit["C"], "hilbert_increment_C_far_fit": fit["C_far"],
              "hilbert_increment_samples": fit["count"]}
    if doubling:
        fine, _ = hilbert_increment_samples(delta=delta, refine=2)
        fine_c = fit_hilbert_increment(fine)["C"]
        change = abs(fine_c - fit["C"]) / fit["C"]
        fitted["hilbert_increment_C_fit_doubled"] = fine_c
        out.append(InequalityRecord("hilbert_increment_fit_stability", change, 0.05,
                                    {"C": fit["C"], "C_doubled": fine_c}, "lt"))
    return out, fitted


def breakthrough_suite(c1: float | None = None, c2: float | None = None,
                    alphas=(0.1, 0.25, 0.3, 0.4), xi0_fracs=(0.0, 0.01, 0.1, 1.0),
                    per_decade: int = 4) -> tuple[list[InequalityRecord], dict]:
    """Breakthrough inequality with the frozen ``(C1, C2)`` at amplitude ``H = C1 delta^(1-2 alpha)``."""
    cal = load_calibration()
    c1 = cal["breakthrough"]["C1"] if c1 is None else c1
    c2 = cal["breakthrough"]["C2"] if c2 is None else c2
    delta = cal["breakthrough"]["delta"]
    out = []
    for alpha in alphas:
        h = c1 * delta ** (1 - 2 * alpha)
        for frac in xi0_fracs:
            km = KiselevModulus(h, delta, 1.0 - alpha, frac * delta)
            for xi in hilbert_increment_xis(delta, per_decade):
                try:
                    pair = make_extremal_pair(km, xi)
                except ConstructionFailed as exc:
                    out.append(InequalityRecord("breakthrough_construction", 1.0, 0.0,
                                                {"alpha": alpha, "xi": xi, "reason": str(exc)}, "le"))
                    continue
                out.extend(verify_breakthrough_inequality(pair, km, alpha, c1, c2))
    return out, {"C1": c1, "C2": c2}


def shipped_supercritical_modulus(b: float = 1.0) -> SupercriticalModulus:
    cal = load_calibration()["supercritical"]
    _, minorant = default_modulus_setup(cal["sigma"])
    return SupercriticalModulus(minorant, b, cal["kappa"], cal["gamma"])


def supercritical_suite(b: float = 1.0) -> tuple[list[InequalityRecord], dict]:
    cal = load_calibration()["supercritical"]
    sm = shipped_supercritical_modulus(b)
    recs = verify_section_3_3(sm)
    return recs, {"gamma": sm.gamma, "kappa": sm.kappa, "sigma": cal["sigma"], "C_far": cal["C_far"],
                  "delta_B": sm.delta_b, "a": sm.minorant.a, "C_bound": sm.minorant.c_norm}


SUITE_RUNNERS = {
    "operators": lambda: (operator_equivalence_records(), {}),
    "hilbert-increment": hilbert_increment_suite,
    "breakthrough": breakthrough_suite,
    "supercritical": supercritical_suite,
}


def run_suites(names) -> tuple[list[InequalityRecord], dict]:
    records, fitted = [], {}
    for name in names:
        recs, fit = SUITE_RUNNERS[name]()
        records.extend(recs)
        fitted.update(fit)
    return records, fitted


def verification_report(records, fitted: dict) -> dict:
    """JSON-ready report: every record plus pass counts and fitted constants."""
    recs = list(records)
    return {"records": [r.to_dict() for r in recs],
            "summary": {"counts": summarize(recs), "passed": all(r.passed for r in recs),
                        "fitted": fitted}}
