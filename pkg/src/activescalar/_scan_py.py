"""NumPy fallback for the pair scans in ``_scan.pyx`` (same signatures and results)."""
import numpy as np


def max_gap_scan(theta, omega_lag):
    theta = np.ascontiguousarray(theta, dtype=float)
    n = theta.size
    best, bi, bj = -np.inf, 0, 1
    for lag in range(1, n):
        gap = theta - np.roll(theta, -lag) - omega_lag[lag]
        i = int(np.argmax(gap))
        # strict comparison keeps the first maximizer in (i, lag) order like the loop version
        if gap[i] > best or (gap[i] == best and (i, lag) < (bi, (bj - bi) % n)):
            best, bi, bj = float(gap[i]), i, (i + lag) % n
    return best, bi, bj


def max_ratio_scan(theta, denom_lag):
    theta = np.ascontiguousarray(theta, dtype=float)
    n = theta.size
    best, bi, bj = 0.0, 0, 1
    for lag in range(1, n // 2 + 1):
        r = np.abs(theta - np.roll(theta, -lag)) / denom_lag[lag]
        i = int(np.argmax(r))
        if r[i] > best or (r[i] == best and (i, lag) < (bi, (bj - bi) % n)):
            best, bi, bj = float(r[i]), i, (i + lag) % n
    return best, bi, bj
