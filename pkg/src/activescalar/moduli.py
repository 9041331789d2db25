"""Moduli of continuity, breakthrough detection and dissipation functionals.

Two families are provided:

* :class:`KiselevModulus` -- linear on ``(0, xi0)``, Hoelder ``H (xi/delta)^beta``
  up to ``delta`` and flat beyond, with ``xi0`` shrinking in time.
* :class:`SupercriticalModulus` -- the family ``omega_B`` built from the
  minorant ``m`` of the logarithmic kernel. On ``(0, delta(B))`` its slope is
  ``B - B^2/(2 C_a kappa) int_0^xi (3 + log(delta/eta)) / (eta m(eta)) d eta``;
  beyond it the slope is ``gamma m(2 xi)``.

Every modulus object exposes ``value``, ``derivative`` (one-sided),
``second_derivative``, ``breakpoints`` (kinks) and ``plateau`` (the scale
beyond which it is constant, or ``None``).

Open point worth knowing: the breakthrough lemma needs one of
``omega(0+) > 0``, ``omega'(0+) = inf`` or ``omega''(0+) = -inf``. For
``omega_B`` the last holds because ``1/(eta m(eta))`` diverges like
``log(1/eta)`` at 0; this is not verified anywhere and only noted here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import optimize
from scipy.interpolate import CubicHermiteSpline

from . import kernels
from .errors import SearchExhausted
from .quadrature import Minorant, fractional_constant, quad
from .spectral import GridFunction, derivative as grid_derivative, evaluate


# --------------------------------------------------------------------------- families


@dataclass(frozen=True)
class PowerModulus:
    """``omega(xi) = c xi^p``; ``p = 1`` is the degenerate linear modulus used in tests."""

    c: float
    p: float = 1.0
    breakpoints: tuple = ()
    plateau: float | None = None

    def value(self, xi):
        return self.c * np.abs(np.asarray(xi, dtype=float)) ** self.p

    def derivative(self, xi, side: int = 1):
        return self.c * self.p * np.asarray(xi, dtype=float) ** (self.p - 1)

    def second_derivative(self, xi, side: int = 1):
        return self.c * self.p * (self.p - 1) * np.asarray(xi, dtype=float) ** (self.p - 2)


@dataclass(frozen=True)
class KiselevModulus:
    h_amp: float
    delta: float
    beta: float
    xi0: float

    def __post_init__(self):
        if not (self.h_amp > 0 and self.delta > 0):
            raise ValueError("h_amp and delta must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 0 <= self.xi0 <= self.delta:
            raise ValueError("xi0 must lie in [0, delta]")

    @property
    def breakpoints(self):
        return (self.xi0, self.delta) if self.xi0 > 0 else (self.delta,)

    @property
    def plateau(self):
        return self.delta

    @property
    def _scale(self):
        return self.h_amp * self.delta ** (-self.beta)

    def value(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        b, s, x0 = self.beta, self._scale, self.xi0
        out = np.full(xi.shape, self.h_amp)
        mid = xi <= self.delta
        out = np.where(mid, s * xi ** b, out)
        if x0 > 0:
            out = np.where(xi < x0, b * s * x0 ** (b - 1) * xi + (1 - b) * s * x0**b, out)
        return out if out.ndim else float(out)

    def derivative(self, xi, side: int = 1):
        """One-sided derivative; ``side=+1`` right, ``-1`` left."""
        xi = np.asarray(xi, dtype=float)
        b, s, x0 = self.beta, self._scale, self.xi0
        with np.errstate(divide="ignore"):
            hold = b * s * xi ** (b - 1)
        inner = (xi < self.delta) if side > 0 else (xi <= self.delta)
        out = np.where(inner, hold, 0.0)
        if x0 > 0:
            lin = (xi < x0) if side > 0 else (xi <= x0)
            out = np.where(lin, b * s * x0 ** (b - 1), out)
        return out if out.ndim else float(out)

    def second_derivative(self, xi, side: int = 1):
        xi = np.asarray(xi, dtype=float)
        b, s = self.beta, self._scale
        lo = (xi >= self.xi0) if side > 0 else (xi > self.xi0)
        hi = (xi < self.delta) if side > 0 else (xi <= self.delta)
        with np.errstate(divide="ignore"):
            curv = b * (b - 1) * s * xi ** (b - 2)
        out = np.where(lo & hi, curv, 0.0)
        return out if out.ndim else float(out)

    def d_dxi0(self, xi):
        """Partial derivative of the value with respect to ``xi0``."""
        xi = np.asarray(xi, dtype=float)
        b, s, x0 = self.beta, self._scale, self.xi0
        if x0 <= 0:
            return np.zeros_like(xi) if xi.ndim else 0.0
        out = np.where(xi < x0, b * (1 - b) * s * x0 ** (b - 2) * (x0 - xi), 0.0)
        return out if out.ndim else float(out)

    def with_xi0(self, xi0: float) -> "KiselevModulus":
        return KiselevModulus(self.h_amp, self.delta, self.beta, xi0)

    def to_dict(self):
        return {"h_amp": self.h_amp, "delta": self.delta, "beta": self.beta, "xi0": self.xi0}


def xi0_evolution(delta: float, alpha: float, c2: float, t):
    """Closed-form solution of ``xi0' = -c2 xi0^(1-2 alpha)``, ``xi0(0) = delta``."""
    if not 0 < alpha < 0.5 or c2 <= 0:
        raise ValueError("need 0 < alpha < 1/2 and c2 > 0")
    t = np.asarray(t, dtype=float)
    base = np.maximum(0.0, delta ** (2 * alpha) - 2 * alpha * c2 * t)
    out = base ** (1.0 / (2 * alpha))
    return out if out.ndim else float(out)


def xi0_extinction_time(delta: float, alpha: float, c2: float) -> float:
    return delta ** (2 * alpha) / (2 * alpha * c2)


def xi0_rate(delta: float, alpha: float, c2: float, t) -> float:
    x0 = xi0_evolution(delta, alpha, c2, t)
    return -c2 * x0 ** (1 - 2 * alpha) if x0 > 0 else 0.0


# ------------------------------------------------------------ logarithmic family


def _tail_poly(coeffs, c):
    """Ascending coefficients of ``Q`` with ``int_s^inf poly(u) e^{-cu} du = e^{-cs} Q(s)``."""
    p = np.asarray(coeffs, dtype=float)
    q = np.zeros(1)
    k = 0
    while p.size and np.any(p):
        q = npoly.polyadd(q, p / c ** (k + 1))
        p = npoly.polyder(p)
        k += 1
    return tuple(float(v) for v in q)


def _exp_poly_sum(terms, s):
    """``sum_j e^{-c_j s} Q_j(s)`` for ``terms = [(c_j, Q_j), ...]``."""
    total = 0.0
    for c, q in terms:
        acc = 0.0
        for coef in reversed(q):
            acc = acc * s + coef
        total += math.exp(-c * s) * acc
    return total


@lru_cache(maxsize=16)
def _m_antiderivative(minorant: Minorant):
    """Spline of ``G(r) = int_r^{2 sigma} m`` in the variable ``u = log r``."""
    u = np.linspace(math.log(1e-60), math.log(2 * minorant.sigma), 3000)
    nodes, weights = np.polynomial.legendre.leggauss(12)
    half = 0.5 * np.diff(u)
    mids = 0.5 * (u[1:] + u[:-1])
    pts = mids[:, None] + half[:, None] * nodes[None, :]
    # d G / d u = -r m(r); integrate r m(r) over each panel
    panel = (minorant.r_m(np.exp(pts)) * weights).sum(axis=1) * half
    g = np.concatenate([np.cumsum(panel[::-1])[::-1], [0.0]])
    return CubicHermiteSpline(u, g, -minorant.r_m(np.exp(u)))


def m_integral(minorant: Minorant, a: float, b: float) -> float:
    """``int_a^b m(r) dr`` for ``0 < a <= b``."""
    spl = _m_antiderivative(minorant)
    lo = math.log(2 * minorant.sigma)
    ga = float(spl(min(math.log(a), lo))) if a < 2 * minorant.sigma else 0.0
    gb = float(spl(min(math.log(b), lo))) if b < 2 * minorant.sigma else 0.0
    return ga - gb


def m_derivative(minorant: Minorant, r):
    """``m'(r)`` on ``(0, 2 sigma)``."""
    r = np.asarray(r, dtype=float)
    sig = minorant.sigma
    lg = np.log1p(1.0 / r**2)
    base = 1.0 / (r * lg)
    dbase = -1.0 / (r**2 * lg) + 2.0 / (r**2 * (r**2 + 1.0) * lg**2)
    t = np.clip((r - sig) / sig, 0.0, 1.0)
    phi = 1.0 - t * t * (3 - 2 * t)
    dphi = np.where((t > 0) & (t < 1), -6.0 * t * (1 - t) / sig, 0.0)
    return (dbase * phi + base * dphi) / minorant.c_norm


def delta_of_b(minorant: Minorant, b: float, kappa: float) -> float:
    """Solve ``m(delta) = b / kappa`` (``m`` decreases from inf to 0 on ``(0, 2 sigma)``)."""
    target = math.log(b / kappa)

    def f(v):
        # m vanishes at 2 sigma; clamp so the bracket end stays finite
        return math.log(max(float(minorant.m(math.exp(v))), 1e-300)) - target

    hi = math.log(minorant.sigma)
    if f(hi) > 0:
        hi = math.log(2 * minorant.sigma * (1 - 1e-9))
    return math.exp(optimize.brentq(f, -300.0, hi, xtol=1e-14, rtol=1e-15))


@dataclass(frozen=True)
class SupercriticalModulus:
    minorant: Minorant
    b: float
    kappa: float
    gamma: float
    delta_b: float = field(init=False)
    c_a: float = field(init=False)

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("B must be at least 1")
        if self.kappa <= 0 or self.gamma <= 0:
            raise ValueError("kappa and gamma must be positive")
        object.__setattr__(self, "c_a", self.minorant.c_a)
        d = delta_of_b(self.minorant, self.b, self.kappa)
        object.__setattr__(self, "delta_b", d)
        self._build_closed_forms()
        object.__setattr__(self, "_value_at_delta", self.b * d - self._slope_coeff * self._j_integral(0.0))
        if d > self.minorant.sigma / 2:
            raise ValueError(f"delta(B) = {d:.3g} exceeds sigma/2; decrease kappa")
        if not self.derivative(d, side=-1) > 0:
            raise ValueError("omega_B' is not positive on (0, delta(B)]; decrease kappa")

    # closed forms on (0, delta]; s = log(delta / xi)
    @property
    def _slope_coeff(self):
        return self.b**2 / (2 * self.c_a * self.kappa)

    def _build_closed_forms(self):
        # log1p(delta^-2 e^{2u}) = 2(u + ell) + sum_j (-1)^(j+1) delta^(2j) e^{-2ju} / j
        ell = -math.log(self.delta_b)
        main = [6 * ell, 2 * (3 + ell), 2.0]  # (3 + u) * 2 (u + ell)
        d2 = self.delta_b**2
        series = [((-1) ** (j + 1) * d2**j / j, 2.0 * j + 1.0) for j in range(1, 8)]
        j_terms = [(1.0, _tail_poly(main, 1.0))]
        j_terms += [(c, tuple(cj * v for v in _tail_poly([3.0, 1.0], c))) for cj, c in series]
        # int_0^xi J = delta int_s^inf J(u) e^{-u} du
        k_terms = [(c + 1.0, _tail_poly(q, c + 1.0)) for c, q in j_terms]
        scale = self.minorant.c_norm * self.delta_b
        object.__setattr__(self, "_j_terms", j_terms)
        object.__setattr__(self, "_k_terms", k_terms)
        object.__setattr__(self, "_j_scale", scale)

    def _j(self, s):
        """``int_0^xi (3 + log(delta/eta)) / (eta m(eta)) d eta`` at ``xi = delta e^{-s}``."""
        return self._j_scale * _exp_poly_sum(self._j_terms, s)

    def _j_integral(self, s):
        """``int_0^xi J(t) dt`` at ``xi = delta e^{-s}``."""
        return self._j_scale * self.delta_b * _exp_poly_sum(self._k_terms, s)

    @property
    def breakpoints(self):
        return (self.delta_b, self.minorant.sigma)

    @property
    def plateau(self):
        return self.minorant.sigma

    def _value_scalar(self, xi):
        d = self.delta_b
        if xi <= 0:
            return 0.0
        if xi <= d:
            return self.b * xi - self._slope_coeff * self._j_integral(math.log(d / xi))
        top = min(xi, self.minorant.sigma)
        return self._value_at_delta + 0.5 * self.gamma * m_integral(self.minorant, 2 * d, 2 * top)

    def value(self, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 0:
            return self._value_scalar(float(abs(xi)))
        return np.array([self._value_scalar(float(abs(v))) for v in xi.ravel()]).reshape(xi.shape)

    def _deriv_scalar(self, xi, side):
        d = self.delta_b
        if xi < d or (xi == d and side < 0):
            if xi <= 0:
                return self.b
            return self.b - self._slope_coeff * self._j(math.log(d / xi))
        return self.gamma * float(self.minorant.m(2 * xi))

    def derivative(self, xi, side: int = 1):
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 0:
            return self._deriv_scalar(float(xi), side)
        return np.array([self._deriv_scalar(float(v), side) for v in xi.ravel()]).reshape(xi.shape)

    def _second_scalar(self, xi, side):
        d = self.delta_b
        if xi < d or (xi == d and side < 0):
            s = math.log(d / xi)
            lg = 2 * (s - math.log(d)) + math.log1p(d**2 * math.exp(-2 * s))
            return -self._slope_coeff * self.minorant.c_norm * (3 + s) * lg
        if 2 * xi >= 2 * self.minorant.sigma:
            return 0.0
        return 2 * self.gamma * float(m_derivative(self.minorant, 2 * xi))

    def second_derivative(self, xi, side: int = 1):
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 0:
            return self._second_scalar(float(xi), side)
        return np.array([self._second_scalar(float(v), side) for v in xi.ravel()]).reshape(xi.shape)

    @property
    def concave_at_delta(self) -> bool:
        d = self.delta_b
        return self.derivative(d, -1) >= self.derivative(d, 1)

    def to_dict(self):
        return {"B": self.b, "kappa": self.kappa, "gamma": self.gamma,
                "delta_B": self.delta_b, "C_a": self.c_a}


# ------------------------------------------------------------------- obedience


@dataclass(frozen=True)
class BreakthroughReport:
    x: float
    y: float
    xi: float
    gap: float
    slope_x: float
    slope_y: float
    status: str

    def to_dict(self):
        return dict(self.__dict__)


def _lag_distances(n, h):
    lags = np.arange(n)
    return np.minimum(lags, n - lags) * h


def check_obedience(theta: GridFunction, modulus, tolerance: float = 1e-8,
                    refine: bool = True) -> BreakthroughReport:
    """Locate the pair maximizing ``theta(x) - theta(y) - omega(|x-y|)``.

    Exhaustive O(n^2) scan over grid pairs (torus distance), then a bounded
    scalar search in the separation along the antidiagonal through the best
    pair using the trigonometric interpolant.
    Status is ``critical`` when ``|gap| <= tolerance``, otherwise ``obeys``
    for negative gaps and ``violated`` for positive ones.
    """
    grid = theta.grid
    n, h, L = grid.n, grid.spacing, grid.length
    dist = _lag_distances(n, h)
    omega_lag = np.empty(n)
    omega_lag[0] = np.inf
    omega_lag[1:] = modulus.value(dist[1:])
    vals = np.ascontiguousarray(theta.values)
    gap, i, j = kernels.max_gap_scan(vals, omega_lag)
    x, y = grid.points[i], grid.points[j]
    signed = ((y - x + L / 2) % L) - L / 2  # y = x + signed on the torus
    xi = abs(signed)
    if refine and n >= 8:
        direction = 1.0 if signed >= 0 else -1.0
        lines = [(x + signed / 2, direction)]
        if abs(xi - L / 2) < h / 2:
            # antipodal pair: both arcs are shortest, so refine along both antidiagonals
            lines.append((x - signed / 2, -direction))
        lo, hi = max(xi - h, 1e-3 * h), min(xi + h, L / 2)
        for centre, sign in lines:
            def neg_gap(s, centre=centre, sign=sign):
                a = centre - sign * s / 2
                b = centre + sign * s / 2
                return -(evaluate(theta, a) - evaluate(theta, b) - float(modulus.value(s)))

            res = optimize.minimize_scalar(neg_gap, bounds=(lo, hi), method="bounded",
                                           options={"xatol": 1e-12 * max(1.0, xi)})
            if -res.fun > gap:
                gap, xi = -res.fun, float(res.x)
                x = centre - sign * xi / 2
                y = centre + sign * xi / 2
    dtheta = grid_derivative(theta)
    slope_x, slope_y = evaluate(dtheta, x), evaluate(dtheta, y)
    if abs(gap) <= tolerance:
        status = "critical"
    elif gap < 0:
        status = "obeys"
    else:
        status = "violated"
    return BreakthroughReport(float(x % L), float(y % L), float(xi), float(gap),
                              float(slope_x), float(slope_y), status)


def holder_seminorm(theta: GridFunction, beta: float) -> float:
    """``max |theta(x) - theta(y)| / |x - y|^beta`` over grid pairs (torus distance)."""
    n, h = theta.grid.n, theta.grid.spacing
    dist = _lag_distances(n, h)
    denom = np.empty(n)
    denom[0] = np.inf
    denom[1:] = dist[1:] ** beta
    best, _, _ = kernels.max_ratio_scan(np.ascontiguousarray(theta.values), denom)
    return float(best)


# --------------------------------------------------------------- dissipation


def _kinks_in(modulus, lo, hi, transform):
    pts = []
    for b in getattr(modulus, "breakpoints", ()):
        for p in transform(b):
            if lo < p < hi:
                pts.append(p)
    return sorted(set(pts))


def _integrate_pieces(f, edges, **kw):
    return sum(quad(f, a, b, **kw) for a, b in zip(edges[:-1], edges[1:]) if b > a)


def _taylor_cutoff(modulus, xi, small):
    """Radius below which the second difference is replaced by its two-term expansion.

    Kept below a quarter of the distance to the nearest kink so the one-sided
    expansion stays valid; round-off in the second difference is negligible
    at this scale.
    """
    cut = small * xi / 2
    for b in getattr(modulus, "breakpoints", ()):
        gap = abs(b - xi)
        if gap > 0:
            cut = min(cut, gap / 8)
    return cut


def _taylor_pieces(modulus, xi):
    """Coefficients of ``omega(xi+2e) + omega(xi-2e) - 2 omega(xi) = c1 e + c2 e^2 + ...``."""
    c1 = 2.0 * (modulus.derivative(xi, 1) - modulus.derivative(xi, -1))
    c2 = 2.0 * (modulus.second_derivative(xi, 1) + modulus.second_derivative(xi, -1))
    return float(c1), float(c2)


def dissipation_d_alpha(modulus, alpha: float, xi: float, c_alpha: float | None = None,
                        small: float = 1e-3) -> float:
    """Dissipation bound ``D_alpha(xi)`` for a concave modulus (non-positive).

    ``c_alpha`` defaults to the normalization of the singular-integral form of
    ``(-Delta)^alpha`` matching the multiplier ``|k|^(2 alpha)``.
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    if c_alpha is None:
        c_alpha = fractional_constant(alpha)
    s = 1.0 + 2.0 * alpha
    w0 = float(modulus.value(xi))

    def inner(eta):
        return (float(modulus.value(xi + 2 * eta)) + float(modulus.value(xi - 2 * eta)) - 2 * w0) / eta**s

    def outer(eta):
        return (float(modulus.value(xi + 2 * eta)) - float(modulus.value(2 * eta - xi)) - 2 * w0) / eta**s

    eta_c = _taylor_cutoff(modulus, xi, small)
    c1, c2 = _taylor_pieces(modulus, xi)
    # near eta = 0 the second difference is c1 eta + c2 eta^2; integrate that exactly
    first = c1 * eta_c ** (2 - s) / (2 - s) + c2 * eta_c ** (3 - s) / (3 - s)
    edges = [eta_c] + _kinks_in(modulus, eta_c, xi / 2, lambda b: [abs(b - xi) / 2]) + [xi / 2]
    tol = {"epsabs": 1e-12 * max(w0, 1e-300) * xi ** (-2 * alpha), "epsrel": 1e-10, "limit": 1000}
    first += _integrate_pieces(inner, edges, **tol)

    plateau = getattr(modulus, "plateau", None)
    if plateau is not None:
        top = (plateau + xi) / 2
        edges = [xi / 2] + _kinks_in(modulus, xi / 2, top, lambda b: [(b - xi) / 2, (b + xi) / 2]) + [top]
        second = _integrate_pieces(outer, edges, **tol)
        second += -2 * w0 * top ** (-2 * alpha) / (2 * alpha) if alpha > 0 else 0.0
    else:
        edges = [xi / 2] + _kinks_in(modulus, xi / 2, np.inf, lambda b: [(b - xi) / 2, (b + xi) / 2])
        second = _integrate_pieces(outer, edges + [edges[-1] + xi], **tol)
        second += quad(outer, edges[-1] + xi, np.inf, **tol)
    return c_alpha * (first + second)


def dissipation_d_b(modulus, minorant: Minorant, xi: float, a_const: float = 1.0,
                    small: float = 1e-3) -> float:
    """Lower bound ``D(xi)`` (non-negative) for ``L1 theta(x) - L1 theta(y)`` at a touching pair.

    Returns ``inf`` when ``xi`` sits exactly on a kink where the slope drops:
    the weight ``m(2 eta)/eta`` is not integrable against a first-order jump.
    """
    if not 0 < xi < minorant.sigma * 2:
        raise ValueError("xi must lie in (0, 2 sigma)")
    w0 = float(modulus.value(xi))
    sig = minorant.sigma
    c1, c2 = _taylor_pieces(modulus, xi)
    if c1 < -1e-12 * abs(float(modulus.derivative(xi, -1))):
        return math.inf

    def weight(eta):
        return float(minorant.m(2 * eta)) / eta

    def inner(eta):
        return (2 * w0 - float(modulus.value(xi + 2 * eta)) - float(modulus.value(xi - 2 * eta))) * weight(eta)

    def outer(eta):
        return (2 * w0 - float(modulus.value(xi + 2 * eta)) + float(modulus.value(2 * eta - xi))) * weight(eta)

    eta_c = _taylor_cutoff(modulus, xi, small)
    # -(c2 e^2) m(2e)/e  with  e m(2e) = r m(r)/2 at r = 2e
    first = -c2 * quad(lambda e: float(minorant.r_m(2 * e)) / 2, 0.0, eta_c, epsabs=0, epsrel=1e-10)
    edges = [eta_c] + _kinks_in(modulus, eta_c, xi / 2, lambda b: [abs(b - xi) / 2]) + [xi / 2]
    edges = sorted(set(edges + [e for e in (sig / 2, sig) if eta_c < e < xi / 2]))
    tol = {"epsabs": 1e-13 * max(w0, 1e-300), "epsrel": 1e-10, "limit": 1000}
    first += _integrate_pieces(inner, edges, **tol)

    top = max(sig, xi / 2)
    edges = [xi / 2] + _kinks_in(modulus, xi / 2, top, lambda b: [(b - xi) / 2, (b + xi) / 2])
    edges = sorted(set(edges + [e for e in (sig / 2,) if xi / 2 < e < top] + [top]))
    second = _integrate_pieces(outer, edges, **tol)
    return a_const * (first + second)


# --------------------------------------------------------------- initial B


def select_initial_b(theta0: GridFunction, m_inf: float, minorant: Minorant, kappa: float,
                     gamma: float, b_max: float = 2.0**60) -> float:
    """Smallest ``B`` in a doubling search with ``omega_B(b) >= 2M`` and ``omega_B(sigma) >= 2M``.

    ``b = 2M / ||theta0'||_inf``; concavity then gives
    ``omega_B(xi) >= min(xi ||theta0'||_inf, 2M)`` for every ``xi``.
    """
    grad = float(np.max(np.abs(grid_derivative(theta0).values)))
    target = 2.0 * m_inf
    if grad == 0.0 or target == 0.0:
        return 1.0
    b_sep = target / grad
    B = 1.0
    while B <= b_max:
        try:
            mod = SupercriticalModulus(minorant, B, kappa, gamma)
        except ValueError:
            mod = None
        if mod is not None and mod.value(b_sep) >= target and mod.value(minorant.sigma) >= target:
            return B
        B *= 2.0
    raise SearchExhausted(f"no B <= {b_max:g} makes omega_B reach 2M = {target:g}")
