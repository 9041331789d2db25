"""Named initial data on the 2*pi torus.

Every preset is ``amplitude * profile(x)``; ``scale`` sets the Gaussian width
where a preset has one and ``seed`` feeds the random ones.
"""
from __future__ import annotations

import numpy as np

from ..spectral import GridFunction, PeriodicGrid

TWO_PI = 2.0 * np.pi
RANDOM_MODES = 8


def _periodized_gaussian(x, scale: float, centre: float = np.pi):
    out = np.zeros_like(x)
    for j in (-2, -1, 0, 1, 2):
        out += np.exp(-scale * (x + TWO_PI * j - centre) ** 2)
    return out


def _steep_odd(x, scale):
    out = np.zeros_like(x)
    for j in (-2, -1, 0, 1, 2):
        y = x + TWO_PI * j
        out -= np.sin(y) * np.exp(-scale * (y - np.pi) ** 2)
    return out


def _random_modes(x, seed: int):
    rng = np.random.default_rng(seed)
    k = np.arange(1, RANDOM_MODES + 1)
    a = rng.normal(size=k.size) / k**2
    b = rng.normal(size=k.size) / k**2
    return np.cos(np.outer(x, k)) @ a + np.sin(np.outer(x, k)) @ b


def _random_nonnegative(x, seed):
    f = _random_modes(x, seed)
    # lift by the minimum over a fine grid so the band-limited field is >= 0 everywhere
    fine = _random_modes(np.linspace(0.0, TWO_PI, 4096, endpoint=False), seed)
    return f - fine.min()


PRESETS = {
    # name: (profile(x, scale, seed), non-negative, default scale)
    "cosine-bump": (lambda x, s, r: 1.0 + np.cos(x), True, None),
    "two-mode": (lambda x, s, r: np.sin(x) + 0.5 * np.sin(2 * x), False, None),
    "steep-odd": (lambda x, s, r: _steep_odd(x, s), False, 1.0),
    "random-band-limited": (lambda x, s, r: _random_modes(x, r), False, None),
    "gaussian-bump": (lambda x, s, r: _periodized_gaussian(x, s), True, 4.0),
    "lifted-two-mode": (lambda x, s, r: 1.3 + np.sin(x) + 0.5 * np.sin(2 * x), True, None),
    "narrow-cosine": (lambda x, s, r: (0.5 * (1.0 + np.cos(x))) ** 4, True, None),
    "random-nonnegative": (lambda x, s, r: _random_nonnegative(x, r), True, None),
}

NONNEGATIVE_PRESETS = tuple(name for name, (_, nonneg, _) in PRESETS.items() if nonneg)


def preset(name: str, grid: PeriodicGrid, amplitude: float = 1.0, scale: float | None = None,
           seed: int = 0) -> GridFunction:
    try:
        profile, _, default_scale = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    s = default_scale if scale is None else scale
    return GridFunction(grid, values=amplitude * profile(grid.points, s, seed))


def from_coefficients(grid: PeriodicGrid, coefficients) -> GridFunction:
    """Field ``sum a cos(kx) + b sin(kx)`` from rows ``(k, a, b)``."""
    x = grid.points
    out = np.zeros_like(x)
    for k, a, b in coefficients:
        out += a * np.cos(k * x) + b * np.sin(k * x)
    return GridFunction(grid, values=out)
