"""Matplotlib rendering of solver traces, sweeps and projection runs.

Every CLI report writes these figures next to its CSV/JSON outputs; the
delimited files stay the canonical record, the PNGs are for eyeballing.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def save_trace_figure(trace, path, title: str | None = None) -> None:
    """Objective and sparsity against the outer iteration count."""
    iters = np.arange(len(trace.risk))
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 6.0), sharex=True)
    ax1.plot(iters, trace.risk, color="tab:blue")
    ax1.set_ylabel("empirical risk")
    ax1.set_yscale("log")
    ax1.grid(alpha=0.3)
    if title:
        ax1.set_title(title)
    ax2.plot(iters, trace.nonzeros, color="tab:red")
    ax2.set_ylabel("nonzero coefficients")
    ax2.set_xlabel("iteration")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_weights_figure(w, path, w_true=None, title: str | None = None) -> None:
    """Stem-style plot of the estimated coefficients, truth overlaid if given."""
    w = np.asarray(w, dtype=float)
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    if w_true is not None:
        ax.plot(np.asarray(w_true, dtype=float), color="0.6", lw=1.0,
                label="true")
    markerline, stemlines, _ = ax.stem(w, linefmt="tab:blue", basefmt=" ")
    plt.setp(markerline, markersize=2.5)
    plt.setp(stemlines, linewidth=0.8)
    ax.set_xlabel("coefficient index")
    ax.set_ylabel("value")
    if w_true is not None:
        ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_sweep_figure(etas, series: dict, path, ylabel: str = "PMSE",
                      title: str | None = None) -> None:
    """Metric-versus-eta curves, one line per labelled series."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, values in series.items():
        ax.plot(etas, values, marker="o", ms=3, label=label)
    ax.set_xscale("log")
    ax.set_xlabel("eta")
    ax.set_ylabel(ylabel)
    if len(series) > 1:
        ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_projection_figure(step_norms, violations, path,
                           dist_to_exact=None) -> None:
    """Convergence of the inner projection loop."""
    k = np.arange(1, len(step_norms) + 1)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.semilogy(k, np.maximum(step_norms, 1e-300), marker="o", ms=3,
                label="step norm")
    ax.semilogy(k, np.maximum(violations, 1e-300), marker="s", ms=3,
                label="constraint violation")
    if dist_to_exact is not None:
        ax.semilogy(k, np.maximum(dist_to_exact, 1e-300), marker="^", ms=3,
                    label="distance to exact projection")
    ax.set_xlabel("inner iteration")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
