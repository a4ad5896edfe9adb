"""Optional figures for CLI reports (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_table(rows: list[dict], x: str, y: str, path, group: str | None = None,
               logx: bool = False, logy: bool = False, absy: bool = False, title: str | None = None):
    """Line plot of column ``y`` against ``x``, one line per value of ``group``."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    groups = sorted({r[group] for r in rows}) if group else [None]
    for g in groups:
        sel = [r for r in rows if group is None or r[group] == g]
        sel.sort(key=lambda r: r[x])
        xs = [r[x] for r in sel]
        ys = [abs(r[y]) if absy else r[y] for r in sel]
        ax.plot(xs, ys, "o-", ms=4, lw=1.2, label=None if g is None else f"{group}={g}")
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    ax.set_ylabel(f"|{y}|" if absy else y)
    if title:
        ax.set_title(title, fontsize=10)
    if group:
        ax.legend(frameon=False, fontsize=8)
    ax.grid(True, which="both", alpha=0.3, lw=0.5)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_profile(s, kappa, path, title: str | None = None):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.plot(s, kappa, lw=1.2)
    ax.set_xlabel("s")
    ax.set_ylabel("curvature")
    if title:
        ax.set_title(title, fontsize=10)
    ax.grid(True, alpha=0.3, lw=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
