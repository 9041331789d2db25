"""SVG figures for run results (matplotlib, Agg backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "activescalar"
plt.rcParams["figure.constrained_layout.use"] = True
VERDICT_COLORS = {"pass": "tab:green", "fail": "tab:red"}


def _save(fig, path: Path) -> str:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path.name


def plot_diagnostics(series: dict, path: Path) -> str:
    """``series`` maps a label to a list of reports."""
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    for label, reports in series.items():
        t = [r.t for r in reports]
        axes[0].plot(t, [r.sup_norm for r in reports], label=label)
        axes[1].plot(t, [r.l2_norm for r in reports], label=label)
        axes[2].semilogy(t, [max(r.grad_sup, 1e-300) for r in reports], label=label)
    for ax, name in zip(axes, ("sup |theta|", "L2 norm", "sup |theta_x|")):
        ax.set_xlabel("t")
        ax.set_title(name)
    if series:
        axes[0].legend(fontsize="small")
    return _save(fig, path)


def plot_snapshots(x: np.ndarray, snapshots: list, path: Path) -> str:
    """``snapshots`` is a list of ``(t, values)``."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for t, values in snapshots:
        ax.plot(x, values, label=f"t = {t:.3g}")
    ax.set_xlabel("x")
    ax.set_ylabel("theta")
    if snapshots:
        ax.legend(fontsize="small")
    return _save(fig, path)


def plot_gap(curves: dict, path: Path, xi0=None, t_star: float | None = None) -> str:
    """Worst obedience gap against time; ``curves`` maps a label to ``(times, gaps)``.

    ``xi0`` is an optional ``(times, values)`` overlay on a second axis.
    """
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for label, (t, g) in curves.items():
        ax.plot(t, g, label=label)
    ax.axhline(0.0, color="k", lw=0.5)
    if t_star is not None:
        ax.axvline(t_star, color="tab:gray", ls="--", label="t*")
    ax.set_xlabel("t")
    ax.set_ylabel("max gap")
    if xi0 is not None:
        ax2 = ax.twinx()
        ax2.plot(xi0[0], xi0[1], color="tab:purple", ls=":", label="xi0(t)")
        ax2.set_ylabel("xi0")
    if curves:
        ax.legend(fontsize="small", loc="lower left")
    return _save(fig, path)


def plot_growth(curves: dict, path: Path, matched_time: float | None = None) -> str:
    """Gradient growth factors ``sup|theta_x|(t) / sup|theta_x|(0)``."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for label, (t, g) in curves.items():
        ax.semilogy(t, g, label=label)
    if matched_time is not None:
        ax.axvline(matched_time, color="tab:gray", ls="--", label="matched time")
    ax.set_xlabel("t")
    ax.set_ylabel("growth factor")
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_margins(records: list, path: Path) -> str:
    """One bar per inequality record: signed margin scaled by the larger side, colored by verdict."""
    n = len(records)
    fig, ax = plt.subplots(figsize=(max(6.0, min(40.0, 0.02 * n + 4)), 3.5))
    if n:
        vals = []
        for r in records:
            scale = max(abs(r["lhs"]) if isinstance(r["lhs"], float) else 1.0,
                        abs(r["rhs"]) if isinstance(r["rhs"], float) else 1.0, 1e-300)
            m = r["margin"]
            vals.append(m / scale if isinstance(m, float) else (1.0 if r["verdict"] == "pass" else -1.0))
        vals = np.clip(vals, -1.0, 1.0)
        ax.bar(np.arange(n), vals, width=1.0, color=[VERDICT_COLORS[r["verdict"]] for r in records])
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("record")
    ax.set_ylabel("relative margin")
    return _save(fig, path)


def plot_kernel(rows: np.ndarray, path: Path) -> str:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogx(rows[:, 0], rows[:, 5], label="K(y) y / P(1/y)")
    ax.semilogx(rows[:, 0], rows[:, 2] / np.maximum(rows[:, 1], 1e-300), label="K1 / K")
    ax.set_xlabel("y")
    ax.legend(fontsize="small")
    return _save(fig, path)
