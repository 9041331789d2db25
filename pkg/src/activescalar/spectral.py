"""Periodic grids, grid functions and Fourier-multiplier operators.

All transforms are real FFTs (``numpy.fft.rfft``) bound to a :class:`PeriodicGrid`.
Wavenumbers are integer multiples of ``2*pi/L``; with the default period
``L = 2*pi`` they are plain integers.

Sign convention for the Hilbert transform: multiplier ``-i*sgn(k)``, which is
the periodization of the line kernel ``1/(pi*(x-y))``. With it ``H sin = -cos``
and ``H cos = sin``.

The logarithmic multiplier ``P(k) = |k|/log(1+k^2)`` is set to 0 at ``k = 0``.
On the torus the smallest nonzero wavenumber is 1, so the ``1/|k|`` growth of
``P`` near the origin on the line never appears.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid of ``n`` points on a circle of length ``length``."""

    n: int
    length: float = 2.0 * np.pi

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError("length must be positive")
        # cached derived arrays; the dataclass stays logically immutable
        k = np.fft.rfftfreq(self.n, d=1.0 / self.n) * (2.0 * np.pi / self.length)
        k.setflags(write=False)
        x = np.arange(self.n) * self.spacing
        x.setflags(write=False)
        object.__setattr__(self, "_k", k)
        object.__setattr__(self, "_x", x)

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def points(self) -> np.ndarray:
        return self._x

    @property
    def wavenumbers(self) -> np.ndarray:
        """Non-negative wavenumbers matching ``rfft`` output ordering."""
        return self._k

    @property
    def mode_index(self) -> np.ndarray:
        """Integer mode numbers 0..n/2 (wavenumber divided by 2*pi/L)."""
        return np.arange(self.n // 2 + 1)

    def dealias_mask(self) -> np.ndarray:
        """True for modes kept by the 2/3 rule, ``|j| <= n/3``."""
        return self.mode_index <= self.n / 3.0

    def function(self, values) -> "GridFunction":
        return GridFunction(self, np.asarray(values, dtype=float))

    def sample(self, func) -> "GridFunction":
        return GridFunction(self, np.asarray(func(self.points), dtype=float))


class GridFunction:
    """Real samples on a :class:`PeriodicGrid` with a lazily cached spectrum.

    Values and spectrum are kept in sync: either side is materialized on
    demand from the other. Treat instances as values; mutate only through
    :meth:`set_values` / :meth:`set_spectrum`.
    """

    __slots__ = ("grid", "_values", "_spectrum")

    def __init__(self, grid: PeriodicGrid, values=None, spectrum=None):
        if (values is None) == (spectrum is None):
            raise ValueError("give exactly one of values or spectrum")
        self.grid = grid
        self._values = None
        self._spectrum = None
        if values is not None:
            self.set_values(values)
        else:
            self.set_spectrum(spectrum)

    @classmethod
    def from_spectrum(cls, grid: PeriodicGrid, spectrum) -> "GridFunction":
        return cls(grid, spectrum=spectrum)

    def set_values(self, values):
        values = np.array(values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        self._values = values
        self._spectrum = None

    def set_spectrum(self, spectrum):
        spectrum = np.array(spectrum, dtype=complex)
        if spectrum.shape != (self.grid.n // 2 + 1,):
            raise ValueError("spectrum has the wrong length for this grid")
        # a real field has real mean and real Nyquist coefficients
        spectrum[0] = spectrum[0].real
        spectrum[-1] = spectrum[-1].real
        self._spectrum = spectrum
        self._values = None

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = np.fft.irfft(self._spectrum, n=self.grid.n)
        return self._values

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            self._spectrum = np.fft.rfft(self._values)
        return self._spectrum

    def copy(self) -> "GridFunction":
        if self._spectrum is not None:
            return GridFunction(self.grid, spectrum=self._spectrum.copy())
        return GridFunction(self.grid, values=self._values.copy())

    def mean(self) -> float:
        return float(self.spectrum[0].real / self.grid.n)

    def energy(self) -> float:
        """Squared L2 norm, ``int |f|^2 dx`` by the trapezoid rule."""
        return float(np.sum(self.values**2) * self.grid.spacing)

    def spectral_energy(self) -> float:
        """Same quantity as :meth:`energy`, computed from the spectrum (Parseval)."""
        c = np.abs(self.spectrum) ** 2
        total = c[0] + 2.0 * np.sum(c[1:]) - (c[-1] if self.grid.n % 2 == 0 else 0.0)
        return float(total * self.grid.spacing / self.grid.n)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.spectral_energy()))

    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other):
        return GridFunction(self.grid, values=self.values + _values_of(other))

    def __sub__(self, other):
        return GridFunction(self.grid, values=self.values - _values_of(other))

    def __mul__(self, scalar):
        return GridFunction(self.grid, values=self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return f"GridFunction(n={self.grid.n}, mean={self.mean():.6g})"


def _values_of(other):
    if isinstance(other, GridFunction):
        return other.values
    return np.asarray(other, dtype=float)


def _half_weights(grid: PeriodicGrid) -> np.ndarray:
    """Weights turning an rfft half-spectrum into a real trigonometric sum."""
    w = np.full(grid.n // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w / grid.n


def evaluate(f: GridFunction, x, derivative: int = 0):
    """Evaluate the trigonometric interpolant of ``f`` (or a derivative) at arbitrary points.

    Cost is O(n) per point; intended for a handful of off-grid evaluations.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = f.grid.wavenumbers
    c = f.spectrum * _half_weights(f.grid)
    if derivative:
        c = c * (1j * k) ** derivative
    if f.grid.n % 2 == 0 and derivative % 2 == 1:
        c[-1] = 0.0  # Nyquist mode has no odd derivative in a real interpolant
    out = np.empty(x.shape)
    # chunk to bound memory for large grids
    chunk = max(1, 2**22 // k.size)
    for start in range(0, x.size, chunk):
        xs = x[start:start + chunk]
        out[start:start + chunk] = np.real(np.exp(1j * np.outer(xs, k)) @ c)
    return out if out.size > 1 else float(out[0])


@dataclass(frozen=True)
class MultiplierSpec:
    """A radial Fourier symbol ``k -> P(k) >= 0`` with ``P(0) = 0``.

    ``kind`` is one of ``fractional`` (param: alpha), ``laplacian``
    (param: epsilon, symbol ``eps*k^2``), ``log_supercritical`` or
    ``composite`` (parts: tuple of specs, symbols added).
    """

    kind: str
    alpha: float = 0.0
    epsilon: float = 0.0
    parts: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in ("fractional", "laplacian", "log_supercritical", "composite"):
            raise ValueError(f"unknown multiplier kind {self.kind!r}")
        if self.kind == "fractional" and not 0.0 <= self.alpha <= 1.0:
            raise ValueError("fractional exponent alpha must lie in [0, 1]")
        if self.kind == "laplacian" and self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")

    @classmethod
    def fractional(cls, alpha: float) -> "MultiplierSpec":
        return cls("fractional", alpha=float(alpha))

    @classmethod
    def laplacian(cls, epsilon: float) -> "MultiplierSpec":
        return cls("laplacian", epsilon=float(epsilon))

    @classmethod
    def log_supercritical(cls) -> "MultiplierSpec":
        return cls("log_supercritical")

    @classmethod
    def composite(cls, parts: Sequence["MultiplierSpec"]) -> "MultiplierSpec":
        return cls("composite", parts=tuple(parts))

    def symbol(self, k) -> np.ndarray:
        k = np.abs(np.asarray(k, dtype=float))
        out = np.zeros_like(k)
        nz = k > 0
        if self.kind == "fractional":
            out[nz] = k[nz] ** (2.0 * self.alpha)
        elif self.kind == "laplacian":
            out[nz] = self.epsilon * k[nz] ** 2
        elif self.kind == "log_supercritical":
            out[nz] = log_symbol(k[nz])
        else:
            for part in self.parts:
                out = out + part.symbol(k)
        return out

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "fractional":
            d["alpha"] = self.alpha
        elif self.kind == "laplacian":
            d["epsilon"] = self.epsilon
        elif self.kind == "composite":
            d["parts"] = [p.to_dict() for p in self.parts]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MultiplierSpec":
        kind = d["kind"]
        if kind == "fractional":
            return cls.fractional(d["alpha"])
        if kind == "laplacian":
            return cls.laplacian(d["epsilon"])
        if kind == "log_supercritical":
            return cls.log_supercritical()
        if kind == "composite":
            return cls.composite([cls.from_dict(p) for p in d["parts"]])
        raise ValueError(f"unknown multiplier kind {kind!r}")


def log_symbol(xi):
    """``P(xi) = |xi| / log(1 + xi^2)`` for ``xi != 0``."""
    xi = np.abs(np.asarray(xi, dtype=float))
    return xi / np.log1p(xi * xi)


def hilbert_transform(f: GridFunction) -> GridFunction:
    k = f.grid.wavenumbers
    mult = -1j * np.sign(k)
    if f.grid.n % 2 == 0:
        mult[-1] = 0.0
    return GridFunction.from_spectrum(f.grid, f.spectrum * mult)


def apply_multiplier(f: GridFunction, m: MultiplierSpec) -> GridFunction:
    return GridFunction.from_spectrum(f.grid, f.spectrum * m.symbol(f.grid.wavenumbers))


def derivative(f: GridFunction, order: int = 1) -> GridFunction:
    k = f.grid.wavenumbers
    mult = (1j * k) ** order
    if f.grid.n % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    return GridFunction.from_spectrum(f.grid, f.spectrum * mult)


def dealias(f: GridFunction) -> GridFunction:
    return GridFunction.from_spectrum(f.grid, f.spectrum * f.grid.dealias_mask())


def refined_max(f: GridFunction, absolute: bool = True, iterations: int = 6) -> tuple[float, float]:
    """Maximum of the trigonometric interpolant (of ``|f|`` if ``absolute``).

    Starts at the best grid point and polishes with Newton steps on ``f'``.
    Returns ``(value, location)``.
    """
    v = f.values
    j = int(np.argmax(np.abs(v) if absolute else v))
    sign = np.sign(v[j]) if absolute and v[j] != 0 else 1.0
    x = f.grid.points[j]
    h = f.grid.spacing
    best = sign * v[j], x
    for _ in range(iterations):
        d1 = evaluate(f, x, 1)
        d2 = evaluate(f, x, 2)
        if d2 * sign >= 0:
            break
        step = -d1 / d2
        if abs(step) > h:
            break
        x = x + step
        val = sign * evaluate(f, x)
        if val >= best[0]:
            best = val, x
        if abs(step) < 1e-15 * max(1.0, abs(x)):
            break
    return float(best[0]), float(best[1] % f.grid.length)
