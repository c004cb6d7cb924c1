"""Static SVG figures; matplotlib is imported lazily."""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "delaykv"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    fig.clf()


def energy_plot(times, E, path, title="energy"):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    pos = E > 0
    if pos.any():
        ax.semilogy(times[pos], E[pos], lw=1.0)
        ax.set_ylabel("E(t)")
    else:
        ax.plot(times, E, lw=1.0)
        ax.set_ylabel("E(t) (identically zero)")
    ax.set_xlabel("t")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)
    plt.close(fig)


def root_scatter(re, im, labels, path, title="characteristic roots"):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 5))
    labels = np.asarray(labels)
    for lab in sorted(set(labels.tolist())):
        sel = labels == lab
        ax.plot(np.asarray(re)[sel], np.asarray(im)[sel], "o", ms=3, label=lab)
    ax.axvline(0.0, color="k", lw=0.6)
    ax.set_xlabel("Re λ")
    ax.set_ylabel("Im λ")
    ax.set_title(title)
    if len(set(labels.tolist())) <= 12:
        ax.legend(fontsize=7)
    _save(fig, path)
    plt.close(fig)


def region_plot(a, tau, verdict, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 5))
    colours = {"stable": "tab:green", "unstable": "tab:red", "indeterminate": "tab:gray"}
    a, tau, verdict = np.asarray(a), np.asarray(tau), np.asarray(verdict)
    for v, c in colours.items():
        sel = verdict == v
        if sel.any():
            ax.plot(a[sel], tau[sel], "s", color=c, ms=4, label=v)
    lo, hi = min(a.min(), tau.min()), max(a.max(), tau.max())
    ax.plot([lo, hi], [lo, hi], "k--", lw=0.8, label="τ = a")
    ax.set_xlabel("a")
    ax.set_ylabel("τ")
    ax.legend(fontsize=7)
    _save(fig, path)
    plt.close(fig)


def sweep_plot(sweeps, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, s in sweeps:
        sel = (s.omegas > 0) & np.isfinite(s.magnitudes)
        ax.loglog(s.omegas[sel], s.magnitudes[sel], lw=1.0, label=f"mode {k}")
    ax.set_xlabel("ω")
    ax.set_ylabel("|H_k(iω)|")
    ax.legend(fontsize=7)
    _save(fig, path)
    plt.close(fig)
