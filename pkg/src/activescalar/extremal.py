"""Fields that touch a modulus of continuity at exactly one pair of points.

The field is ``theta(c + s) = psi(q(s)) / 2`` where

* ``psi`` is odd, increasing and concave on ``(0, inf)``, tangent to the
  modulus at ``xi`` and below it everywhere else;
* ``q`` is a Gaussian-smoothed triangle wave with slope exactly 2 on
  ``[-s_left, s_right]`` (which contains ``[-xi/2, xi/2]``) and a gentler
  return slope, so ``|q'| <= 2``.

For such ``psi``, ``psi(u) - psi(v) <= 2 psi((u - v)/2)``, hence
``|theta(a) - theta(b)| <= psi(dist(a, b)) <= omega(dist(a, b))`` with equality
only at ``a, b = c +- xi/2``. Unequal ``s_left`` and ``s_right`` break the odd
symmetry about ``c`` (an odd profile would make ``H theta`` even about ``c``
and the Hilbert increment across the pair identically zero).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ConstructionFailed
from .spectral import GridFunction, PeriodicGrid, evaluate

TWO_PI = 2.0 * math.pi
MAX_LOG2_N = 21


@dataclass(frozen=True)
class Profile:
    """Odd saturating profile ``psi(r) = amp * g(r / scale)``."""

    kind: str  # "tanh" or "alg<k>"
    amp: float
    scale: float

    @property
    def order(self) -> int:
        return 0 if self.kind == "tanh" else int(self.kind[3:])

    def __call__(self, r):
        u = np.asarray(r, dtype=float) / self.scale
        if self.kind == "tanh":
            return self.amp * np.tanh(u)
        k = self.order
        au = np.abs(u)
        # u / (1 + u^k)^(1/k), written to avoid overflow for large |u|
        big = au > 1.0
        out = np.empty_like(u)
        out[~big] = u[~big] / (1.0 + au[~big] ** k) ** (1.0 / k)
        out[big] = np.sign(u[big]) / (1.0 + au[big] ** (-k)) ** (1.0 / k)
        return self.amp * out

    def derivative(self, r):
        u = np.asarray(r, dtype=float) / self.scale
        if self.kind == "tanh":
            return self.amp / self.scale / np.cosh(u) ** 2
        k = self.order
        return self.amp / self.scale * (1.0 + np.abs(u) ** k) ** (-1.0 - 1.0 / k)

    def second_derivative(self, r):
        u = np.asarray(r, dtype=float) / self.scale
        if self.kind == "tanh":
            return -2.0 * self.amp / self.scale**2 * np.tanh(u) / np.cosh(u) ** 2
        k = self.order
        au = np.abs(u)
        return (-(k + 1.0) * self.amp / self.scale**2 * np.sign(u) * au ** (k - 1)
                * (1.0 + au**k) ** (-2.0 - 1.0 / k))

    @property
    def feature(self) -> float:
        """Length scale that the grid must resolve."""
        return self.scale if self.order == 0 else self.scale * math.sin(math.pi / self.order)


def _tangent_profile(kind: str, value: float, slope: float, xi: float) -> Profile:
    """Profile of the given kind with ``psi(xi) = value`` and ``psi'(xi) = slope``."""
    rho = value / (xi * slope)
    if kind == "tanh":
        # sinh(2u) / (2u) = rho
        target = math.log(rho)
        u = optimize.brentq(lambda v: math.log(math.sinh(2 * v) / (2 * v)) - target,
                            1e-8, 300.0, xtol=1e-15)
        return Profile(kind, value / math.tanh(u), xi / u)
    k = int(kind[3:])
    u = (rho - 1.0) ** (1.0 / k)
    return Profile(kind, value * (1.0 + u**k) ** (1.0 / k) / u, xi / u)


def _profile_below(profile: Profile, modulus, xi: float) -> bool:
    r = np.unique(np.concatenate([
        np.geomspace(1e-6 * xi, math.pi, 3000),
        xi * (1.0 + np.linspace(-0.5, 0.5, 401)),
    ]))
    r = r[(r > 0) & (r <= math.pi)]
    w = np.asarray(modulus.value(r), dtype=float)
    p = profile(r)
    if np.any(p > w + 1e-12 * float(modulus.value(xi))):
        return False
    # strict second-order separation at the tangency point
    return bool(profile.second_derivative(xi) < min(modulus.second_derivative(xi, -1),
                                                     modulus.second_derivative(xi, 1)))


def fit_profile(modulus, xi: float) -> Profile:
    value = float(modulus.value(xi))
    s_left, s_right = float(modulus.derivative(xi, -1)), float(modulus.derivative(xi, 1))
    if value <= 0:
        raise ConstructionFailed("modulus vanishes at the requested separation")
    if not s_right > 0:
        raise ConstructionFailed("modulus is flat at the requested separation")
    if abs(s_left - s_right) > 1e-9 * s_left:
        raise ConstructionFailed("cannot touch a concave corner from below with a smooth profile")
    if value <= xi * s_right * (1 + 1e-10):
        raise ConstructionFailed("modulus is linear through the origin at this separation")
    for kind in ("tanh", "alg2", "alg4", "alg8", "alg16", "alg32"):
        prof = _tangent_profile(kind, value, s_right, xi)
        if _profile_below(prof, modulus, xi):
            return prof
    raise ConstructionFailed(f"no profile stays below the modulus at xi = {xi:.4g}")


def _ramp_spectrum(grid: PeriodicGrid, s_left: float, s_right: float, width: float, centre: float):
    """rfft coefficients of the smoothed triangle wave ``q`` on ``grid``."""
    span = s_left + s_right
    fall = 2.0 * span / (TWO_PI - span)
    corners = np.array([s_right, -s_left])
    jumps = np.array([-(2.0 + fall), 2.0 + fall])
    k = grid.mode_index.astype(float)
    coef = np.zeros(k.size, dtype=complex)
    kk = k[1:]
    phases = np.exp(-1j * np.outer(kk, corners + centre))
    coef[1:] = -(phases @ jumps) / (TWO_PI * kk**2) * np.exp(-0.5 * (kk * width) ** 2)
    coef[0] = s_right - s_left
    return coef * grid.n


@dataclass
class ExtremalPair:
    theta: GridFunction
    x: float
    y: float
    xi: float
    slack: float
    profile: Profile
    centre: float

    @property
    def grid(self) -> PeriodicGrid:
        return self.theta.grid

    def scaled(self, factor: float) -> "ExtremalPair":
        return ExtremalPair(self.theta * factor, self.x, self.y, self.xi, self.slack * factor,
                            Profile(self.profile.kind, self.profile.amp * factor, self.profile.scale),
                            self.centre)


def _needed_n(profile: Profile, width: float) -> int:
    need = max(40.0 / profile.feature, 20.0 / width, 64.0) * (profile.order or 1) ** 0.5
    return 1 << max(6, math.ceil(math.log2(need)))


def make_extremal_pair(modulus, xi: float, grid: PeriodicGrid | None = None,
                       asymmetry: float = 3.0, centre: float = math.pi,
                       resolution_tol: float = 1e-13) -> ExtremalPair:
    """Build a field touching ``modulus`` at separation ``xi`` (high point at ``centre + xi/2``).

    With ``grid=None`` the resolution is chosen from the profile scale and
    doubled until the top quarter of the spectrum is negligible.
    """
    if not 0 < xi < math.pi:
        raise ConstructionFailed("separation must lie in (0, pi)")
    prof = fit_profile(modulus, xi)
    width = min(0.05, xi / 4.0)
    s_right = xi / 2.0 + max(xi, 10.0 * width)
    s_left = xi / 2.0 + asymmetry * (s_right - xi / 2.0)
    if s_left + s_right > 0.8 * math.pi:
        scale = (0.8 * math.pi - xi) / (s_right + s_left - xi)
        s_right = xi / 2.0 + (s_right - xi / 2.0) * scale
        s_left = xi / 2.0 + (s_left - xi / 2.0) * scale
    if min(s_right, s_left) - xi / 2.0 < 6.0 * width:
        raise ConstructionFailed("separation too large for the ramp construction")

    adaptive = grid is None
    g = grid or PeriodicGrid(_needed_n(prof, width))
    while True:
        q = np.fft.irfft(_ramp_spectrum(g, s_left, s_right, width, centre), n=g.n)
        theta = GridFunction(g, values=0.5 * prof(q))
        spec = np.abs(theta.spectrum)
        tail = spec[3 * spec.size // 4:].max() / max(spec.max(), 1e-300)
        if tail <= resolution_tol:
            break
        if not adaptive or g.n >= 1 << MAX_LOG2_N:
            raise ConstructionFailed(f"grid n={g.n} does not resolve the profile (tail {tail:.2e})")
        g = PeriodicGrid(2 * g.n)

    x, y = centre + xi / 2.0, centre - xi / 2.0
    w = float(modulus.value(xi))
    slack = w - (evaluate(theta, x) - evaluate(theta, y))
    if slack < -1e-9 * w or slack > 1e-3 * w:
        raise ConstructionFailed(f"touching failed: slack {slack:.3e} relative to omega {w:.3e}")
    return ExtremalPair(theta, x % g.length, y % g.length, xi, max(slack, 0.0), prof, centre)
