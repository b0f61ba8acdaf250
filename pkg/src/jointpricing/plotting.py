"""PNG renderings of the CLI reports.

Figures are built on :class:`matplotlib.figure.Figure` directly, so nothing
here touches global pyplot state or needs a display.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from matplotlib.figure import Figure


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    return path


def plot_region(n, psi, psi_a: float, psi_b: float, path, n_min: Optional[float] = None, n_ct: Optional[float] = None, title: str = "") -> Path:
    """Joint loading against the proportion of line B, with stand-alone references."""
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    ax.plot(n, psi, color="black", label="joint")
    ax.axhline(psi_a, color="tab:blue", ls="--", label="stand-alone A")
    ax.axhline(psi_b, color="tab:red", ls="--", label="stand-alone B")
    if n_min is not None:
        ax.axvline(n_min, color="grey", ls=":", label="minimum")
    if n_ct is not None:
        ax.axvline(n_ct, color="tab:green", ls="-.", label="critical threshold")
    ax.set_xlabel("proportion of line B policies")
    ax.set_ylabel("loading")
    ax.set_xlim(0.0, 1.0)
    if title:
        ax.set_title(title)
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_sweep(curves: Sequence[tuple[str, np.ndarray, np.ndarray]], path) -> Path:
    """Relative premium difference against the demand share, one line per scenario."""
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    for label, w_d, rel in curves:
        ax.plot(w_d, rel, marker="o", ms=3, label=label)
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xlabel("demand share of line B")
    ax.set_ylabel("relative premium difference")
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_var_fit(n, psi_var, psi_msd, path, gamma: float) -> Path:
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    ax.plot(n, psi_msd, color="black", label=f"mean-sd (gamma={gamma:.3f})")
    ax.plot(n, psi_var, "o", mfc="none", color="tab:blue", label="value-at-risk")
    ax.set_xlabel("proportion of line B policies")
    ax.set_ylabel("loading")
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_losses(series, path) -> Path:
    """Each loss series divided by its own mean, on a shared time axis."""
    fig = Figure(figsize=(7.0, 4.0))
    ax = fig.add_subplot()
    for s in series:
        ax.plot(np.arange(len(s.values)), s.values / s.values.mean(), lw=1, label=s.line_id)
    periods = series[0].periods if series else ()
    step = max(1, len(periods) // 8)
    ax.set_xticks(range(0, len(periods), step))
    ax.set_xticklabels(periods[::step], rotation=45, fontsize="small")
    ax.set_ylabel("loss / mean")
    ax.legend(fontsize="x-small", ncol=2)
    return _save(fig, path)


def plot_psi_bars(line_ids: Sequence[str], psi: Sequence[float], path) -> Path:
    fig = Figure(figsize=(6.0, 3.5))
    ax = fig.add_subplot()
    ax.bar(range(len(psi)), psi, color="tab:grey")
    ax.set_xticks(range(len(psi)))
    ax.set_xticklabels(line_ids, rotation=45, fontsize="small")
    ax.set_ylabel("sigma / pi")
    return _save(fig, path)
