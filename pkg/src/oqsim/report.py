"""Figure rendering for CLI runs: one PNG per report, next to the data file."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_observables", "plot_ledger"]


def plot_observables(t, series: dict, path: Path, title: str = "") -> Path:
    """Time series plot; `series` maps observable name -> values."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for name, values in series.items():
        ax.plot(t, values, label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("expectation value")
    if title:
        ax.set_title(title)
    if series:
        ax.legend(loc="best", fontsize="small")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_ledger(ledger, path: Path, title: str = "") -> Path:
    """Two-panel figure: energy/work/heat balance and entropy with production rate."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 6.4), sharex=True)
    ax1.plot(ledger.t, ledger.energy - ledger.energy[0], label="E - E(0)")
    ax1.plot(ledger.t, ledger.work, label="W")
    ax1.plot(ledger.t, ledger.heat, label="Q")
    ax1.plot(ledger.t, ledger.work + ledger.heat, "--", label="W + Q")
    ax1.set_ylabel("energy")
    ax1.legend(loc="best", fontsize="small")
    ax1.grid(True, alpha=0.3)
    ax2.plot(ledger.t, ledger.entropy, label="S")
    import numpy as np

    if not np.all(np.isnan(ledger.sigma)):
        ax2.plot(ledger.t, ledger.sigma, label="entropy production rate")
    ax2.set_xlabel("t")
    ax2.set_ylabel("entropy")
    ax2.legend(loc="best", fontsize="small")
    ax2.grid(True, alpha=0.3)
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
