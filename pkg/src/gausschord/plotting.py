"""PNG figures for simulation reports (non-interactive Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_wigner(field, path, title="Wigner function"):
    """Heat map of the real part of a Wigner field on its (p, q) grid."""
    g = field.grid
    W = field.values.real
    lim = float(np.abs(W).max()) or 1.0
    extent = [g.axis(1)[0], g.axis(1)[-1], g.axis(0)[0], g.axis(0)[-1]]
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(W, origin="lower", extent=extent, cmap="RdBu_r",
                   vmin=-lim, vmax=lim, aspect="auto")
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    return _save(fig, path)


def plot_decoherence(times, b_curves, hbar, path):
    """Amplitude factors ``exp(-b_t / hbar)`` for every component."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for k, b in enumerate(b_curves):
        ax.plot(times, np.exp(-np.asarray(b) / hbar), label=f"component {k}")
    ax.set_xlabel("t")
    ax.set_ylabel("exp(-b_t / hbar)")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_purity(times, values, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(times, values, marker=".")
    ax.set_xlabel("t")
    ax.set_ylabel("Tr rho^2")
    return _save(fig, path)


def plot_error_growth(times, errors, path, ylabel="max relative |chi| error"):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    errors = np.maximum(np.asarray(errors, dtype=float), 1e-300)
    ax.semilogy(times, errors, marker=".")
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    return _save(fig, path)
