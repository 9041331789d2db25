"""Real-space evaluation of the nonlocal operators.

Everything here works in physical space and is independent of the Fourier
multipliers in :mod:`activescalar.spectral`, which makes it usable as an
oracle for them. The one exception is the kernel table of the logarithmic
operator, which is extracted from its symbol (see :func:`build_kernel_table`).

Domain is the 2*pi torus. Integrals over the line are folded onto ``(0, pi]``
using the symmetric second difference

    g(y) = 2 f(x) - f(x + y) - f(x - y),

which removes the odd part of the principal-value singularity and is computed
from the Fourier coefficients as ``sum 4 sin^2(k y / 2) Re(c_k e^{ikx})`` so no
cancellation occurs for small ``y``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import CubicSpline

from .errors import ComparisonFailure, NoValidExponent, QuadratureNonconvergence
from .spectral import GridFunction, _half_weights, log_symbol

TWO_PI = 2.0 * np.pi


def quad(func, a, b, **kwargs):
    """``scipy.integrate.quad`` returning only the value.

    Exhausting the subdivision budget raises; a roundoff flag is accepted
    when the reported error estimate is still small relative to the value.
    """
    kwargs.setdefault("limit", 400)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(func, a, b, full_output=1, **kwargs)
    value, err = out[0], out[1]
    if len(out) > 3:
        msg = out[3]
        floor = max(kwargs.get("epsabs", 1.49e-8), 1e-6 * abs(value))
        if "roundoff" in msg and err <= floor:
            return value
        raise QuadratureNonconvergence(msg.splitlines()[0] if isinstance(msg, str) else str(msg))
    return value


def fractional_constant(alpha: float) -> float:
    """Normalization ``c`` with ``c * PV int (f(x)-f(x+y))/|y|^(1+2a) dy = |k|^(2a)`` on ``e^{ikx}``."""
    if alpha <= 0:
        return 0.0
    return float(4.0**alpha * special.gamma(0.5 + alpha)
                 / (np.sqrt(np.pi) * abs(special.gamma(-alpha))))


def periodic_power_kernel(y, alpha: float):
    """``sum_j |y + 2 pi j|^(-1-2 alpha)`` for ``0 < y < 2 pi`` (Hurwitz zeta)."""
    s = 1.0 + 2.0 * alpha
    q = np.asarray(y, dtype=float) / TWO_PI
    return TWO_PI ** (-s) * (special.zeta(s, q) + special.zeta(s, 1.0 - q))


class SecondDifference:
    """Callable ``y -> 2 f(x) - f(x+y) - f(x-y)`` for a band-limited ``f``."""

    def __init__(self, f: GridFunction, x: float, cutoff: float = 1e-14):
        c = f.spectrum * _half_weights(f.grid)
        k = f.grid.wavenumbers
        keep = np.abs(c) > cutoff * max(np.abs(c).max(), 1e-300)
        keep[0] = False  # the mean cancels
        self.k = k[keep]
        self.a = np.real(c[keep] * np.exp(1j * self.k * x))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        s = np.sin(0.5 * np.multiply.outer(y, self.k))
        return 4.0 * (s * s) @ self.a


def pv_fractional_laplacian(f: GridFunction, alpha: float, x: float,
                            tol: float = 1e-8) -> float:
    """Principal-value quadrature of ``(-Delta)^alpha f`` at ``x``.

    Normalized to agree with the multiplier ``|k|^(2 alpha)``; the line kernel
    is periodized over all images.
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError("pv_fractional_laplacian needs 0 < alpha < 1/2")
    if abs(f.grid.length - TWO_PI) > 1e-12:
        raise ValueError("real-space operators assume the 2*pi torus")
    g = SecondDifference(f, x)
    if g.k.size == 0:
        return 0.0

    def integrand(y):
        return g(y) * periodic_power_kernel(y, alpha)

    kmax = g.k.max()
    # resolve oscillations of the highest mode; the y^(1-2a) endpoint is left to QAGS
    pts = [p for p in np.pi / kmax * np.arange(1, 8) if p < np.pi]
    total = quad(integrand, 0.0, np.pi, points=pts or None, epsabs=tol * 1e-2, epsrel=1e-11)
    return fractional_constant(alpha) * total


@dataclass(frozen=True)
class CutoffFunction:
    """Radial cutoff: 1 on ``|y| <= sigma``, 0 on ``|y| >= 2 sigma``.

    The transition is the cubic smoothstep, so the profile is C^1 with zero
    slope at both ends.
    """

    sigma: float = 0.1

    def __post_init__(self):
        if not 0 < self.sigma < np.pi / 2:
            raise ValueError("sigma must lie in (0, pi/2)")

    def __call__(self, r):
        t = np.clip((np.abs(np.asarray(r, dtype=float)) - self.sigma) / self.sigma, 0.0, 1.0)
        return 1.0 - t * t * (3.0 - 2.0 * t)


def _filtered_kernel_samples(n_fft: int):
    """Samples of the periodic kernel of ``P`` on the grid ``2 pi j / n_fft``.

    The symbol is tapered by ``exp(-(k/M)^16)`` with ``M = n_fft/2.6`` (the taper
    is below 1e-28 at Nyquist). Its moments vanish to order 15, so the tapered
    kernel matches the true one to ~1e-5 relative for ``M*y`` above ~50 and
    far better beyond. Larger transforms lose accuracy at ``y ~ pi`` to FFT
    round-off against the ``O(n_fft^2)`` near-diagonal samples.
    """
    k = np.arange(n_fft // 2 + 1, dtype=float)
    coeff = np.zeros_like(k)
    coeff[1:] = log_symbol(k[1:]) * np.exp(-(k[1:] / (n_fft / 2.6)) ** 16)
    return -(n_fft / TWO_PI) * np.fft.irfft(coeff, n=n_fft)


def _local_lagrange(xs, ys, x, order=8):
    """Vectorized Lagrange interpolation on a uniform grid ``xs``."""
    h = xs[1] - xs[0]
    i0 = np.clip(np.floor(x / h).astype(int) - order // 2 + 1, 0, xs.size - order)
    out = np.zeros_like(x)
    for j in range(order):
        w = np.ones_like(x)
        xj = xs[i0 + j]
        for m in range(order):
            if m != j:
                w *= (x - xs[i0 + m]) / (xj - xs[i0 + m])
        out += w * ys[i0 + j]
    return out


class KernelTable:
    """Tabulated real-space kernel ``K`` of the logarithmic operator, with its split.

    ``ratio`` stores ``K(y) * y / P(1/y) = K(y) y^2 log(1 + y^-2)``, which is
    smooth and of order one; ``K`` between table radii is rebuilt from a cubic
    spline of the ratio in ``log y``.
    """

    def __init__(self, radii, k_values, cutoff: CutoffFunction, c_bound: float):
        self.radii = np.asarray(radii, dtype=float)
        self.k_values = np.asarray(k_values, dtype=float)
        self.cutoff = cutoff
        self.c_bound = float(c_bound)
        for arr in (self.radii, self.k_values):
            arr.setflags(write=False)

    @property
    def sigma(self) -> float:
        return self.cutoff.sigma

    @property
    def ratio(self) -> np.ndarray:
        return self.k_values * self.radii / log_symbol(1.0 / self.radii)

    @cached_property
    def _spline(self):
        return CubicSpline(np.log(self.radii), self.ratio)

    def kernel(self, y):
        """``K(y)`` for ``0 < y <= pi``; below the first radius the ratio is held constant."""
        y = np.abs(np.asarray(y, dtype=float))
        lo = self.radii[0]
        r = np.where(y < lo, self.ratio[0], self._spline(np.log(np.maximum(y, lo))))
        return r * log_symbol(1.0 / y) / y

    def k1(self, y):
        return self.kernel(y) * self.cutoff(y)

    def k2(self, y):
        return self.kernel(y) * (1.0 - self.cutoff(y))

    @property
    def k1_values(self):
        return self.k_values * self.cutoff(self.radii)

    @property
    def k2_values(self):
        return self.k_values * (1.0 - self.cutoff(self.radii))

    def bound_ratio(self):
        return self.ratio

    def rows(self, minorant=None):
        """Rows ``(y, K, K1, K2, m, bound_ratio)`` for CSV export."""
        m = minorant.m(self.radii) if minorant is not None else np.full_like(self.radii, np.nan)
        return np.column_stack([self.radii, self.k_values, self.k1_values,
                                self.k2_values, m, self.ratio])


def build_kernel_table(cutoff: CutoffFunction | None = None, n_radii: int = 512,
                       r_min: float = 1e-4, n_fft: int = 2**22) -> KernelTable:
    """Tabulate ``K`` by inverting the symbol ``P(k) = |k|/log(1+k^2)``.

    ``L`` applied to a tapered Dirac comb gives the kernel on a fine grid;
    table radii are then filled by local 8-point interpolation of the smooth
    ratio ``K y^2 log(1+y^-2)``.
    """
    cutoff = cutoff or CutoffFunction()
    radii = np.geomspace(r_min, np.pi, n_radii)
    samples = _filtered_kernel_samples(n_fft)
    h = TWO_PI / n_fft
    # only the half period is needed
    nhalf = n_fft // 2 + 8
    ys = np.arange(nhalf) * h
    with np.errstate(divide="ignore", invalid="ignore"):
        smooth = samples[:nhalf] * ys**2 * np.log1p(1.0 / ys**2)
    smooth[0] = smooth[1]  # never used: r_min is thousands of cells from 0
    ratio = _local_lagrange(ys, smooth, radii)
    k_values = ratio * log_symbol(1.0 / radii) / radii

    near = radii < 2.0 * cutoff.sigma
    if np.any(ratio[near] <= 0):
        raise ComparisonFailure("kernel is not positive below 2*sigma")
    c_bound = max(1.0, float(ratio.max()), float(1.0 / ratio[near].min()))
    if not np.isfinite(c_bound) or c_bound > 1e6:
        raise ComparisonFailure(f"comparison constant {c_bound:g} exceeds 1e6")
    return KernelTable(radii, k_values, cutoff, c_bound)


KERNEL_CHOICES = ("full", "K1", "K2")


def apply_nonlocal(f: GridFunction, table: KernelTable, x: float, kernel: str = "full",
                   tol: float = 1e-10) -> float:
    """``int (f(x) - f(x+y)) K_sel(y) dy`` over one period, by quadrature on the table."""
    if kernel not in KERNEL_CHOICES:
        raise ValueError(f"kernel must be one of {KERNEL_CHOICES}")
    kfun = {"full": table.kernel, "K1": table.k1, "K2": table.k2}[kernel]
    g = SecondDifference(f, x)
    if g.k.size == 0:
        return 0.0
    sigma = table.sigma
    lo = table.radii[0]

    def integrand(y):
        return g(y) * kfun(y)

    total = 0.0
    if kernel != "K2":
        total += quad(integrand, 0.0, lo, epsabs=tol * 1e-2, epsrel=1e-10)
    kmax = g.k.max()
    edges = sorted({lo, sigma, 2 * sigma, np.pi}
                   | {p for p in np.pi / kmax * np.arange(1, 16) if lo < p < np.pi})
    if kernel == "K1":
        edges = [e for e in edges if e <= 2 * sigma]
    elif kernel == "K2":
        edges = [e for e in edges if e >= sigma]
    for a, b in zip(edges[:-1], edges[1:]):
        total += quad(integrand, a, b, epsabs=tol * 1e-2, epsrel=1e-10)
    return float(total)


@dataclass(frozen=True)
class Minorant:
    """``m(r) = P(1/r) phi(r) / C`` with its structural constants.

    ``c0`` bounds ``r m(r)`` on ``(0, 2 sigma)`` and ``a`` is an exponent for
    which ``r^a m(r)`` is non-increasing there.
    """

    c_norm: float
    cutoff: CutoffFunction
    c0: float
    a: float

    @property
    def sigma(self) -> float:
        return self.cutoff.sigma

    def m(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        pos = (r > 0) & (r < 2 * self.sigma)
        rp = r[pos]
        out[pos] = (1.0 / rp) / np.log1p(1.0 / rp**2) * self.cutoff(rp) / self.c_norm
        out[r == 0] = np.inf
        return out if out.ndim else float(out)

    def r_m(self, r):
        """``r m(r)``, finite down to ``r = 0``."""
        r = np.abs(np.asarray(r, dtype=float))
        with np.errstate(divide="ignore"):
            out = np.where(r > 0, 1.0 / np.log1p(1.0 / np.maximum(r, 1e-300) ** 2), 0.0)
        return out * self.cutoff(r) / self.c_norm

    @property
    def c_a(self) -> float:
        return (1.0 + 3.0 * self.a) / self.a**2

    def scan_grid(self, refine: int = 1):
        return np.geomspace(1e-8, 2 * self.sigma, 4000 * refine)[:-1]

    def is_monotone(self, a: float, radii) -> bool:
        vals = radii**a * self.m(radii)
        d = np.diff(vals)
        return bool(np.all(d <= 1e-12 * np.abs(vals[:-1])))


def _monotone(exponent, radii, m_values):
    vals = radii**exponent * m_values
    return bool(np.all(np.diff(vals) <= 1e-12 * np.abs(vals[:-1])))


def minorant_constants(table: KernelTable, cutoff: CutoffFunction | None = None,
                       safety: float = 0.99) -> Minorant:
    """Compute ``C0`` and the monotonicity exponent ``a`` by grid scan and bisection."""
    cutoff = cutoff or table.cutoff
    probe = Minorant(table.c_bound, cutoff, 0.0, 1.0)
    radii = probe.scan_grid()
    m_values = probe.m(radii)
    rm = probe.r_m(radii)
    i = int(np.argmax(rm))
    # the peak lies between grid points; polish it so finer scans cannot exceed c0
    lo_r, hi_r = radii[max(i - 1, 0)], radii[min(i + 1, radii.size - 1)]
    peak = optimize.minimize_scalar(lambda r: -probe.r_m(r), bounds=(lo_r, hi_r),
                                    method="bounded", options={"xatol": 1e-14})
    c0 = max(float(rm[i]), -float(peak.fun)) * (1.0 + 1e-9)
    if not _monotone(1e-3, radii, m_values):
        raise NoValidExponent("r^a m(r) is increasing even for a = 1e-3; sigma too large")
    if _monotone(1.0, radii, m_values):
        a = 1.0
    else:
        lo, hi = 1e-3, 1.0
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if _monotone(mid, radii, m_values):
                lo = mid
            else:
                hi = mid
        a = lo
    return Minorant(probe.c_norm, cutoff, c0, safety * a)
