"""Figure rendering for emitted CSV files.

Figures are derived purely from the CSV contents, so plotting never gates
a computation: any emitted table can be re-rendered later.  The Agg
backend keeps everything headless; files are written in whatever format
the output suffix requests (.svg by default from the CLI).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .output import read_csv  # noqa: E402


def _columns(path):
    header, rows = read_csv(path)
    cols = {name: [] for name in header}
    for row in rows:
        for name, cell in zip(header, row):
            try:
                cols[name].append(float(cell))
            except ValueError:
                cols[name].append(float("nan"))
    return header, cols


def plot_trace(csv_path, out_path) -> Path:
    """Render a t,sup,energy trace: sup on a log axis, energy linear."""
    _, cols = _columns(csv_path)
    fig, (ax_sup, ax_en) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 5.6))
    ax_sup.semilogy(cols["t"], cols["sup"], lw=1.2)
    ax_sup.set_ylabel("sup")
    ax_en.plot(cols["t"], cols["energy"], lw=1.2, color="tab:red")
    ax_en.set_ylabel("energy")
    ax_en.set_xlabel("t")
    for ax in (ax_sup, ax_en):
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return Path(out_path)


def plot_profiles(csv_path, out_path, group_col="t", x_col="z", value_col="psi",
                  logx=False) -> Path:
    """Render a long-format profile table as one curve per group value."""
    _, cols = _columns(csv_path)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    times = sorted(set(cols[group_col]))
    for ts in times:
        sel = [i for i, t in enumerate(cols[group_col]) if t == ts]
        ax.plot([cols[x_col][i] for i in sel], [cols[value_col][i] for i in sel],
                lw=1.2, label=f"{group_col}={ts:g}")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(x_col)
    ax.set_ylabel(value_col)
    if len(times) <= 10:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return Path(out_path)


def plot_xy(csv_path, out_path, x_col, y_col, loglog=False) -> Path:
    """Render one column against another, optionally on log-log axes."""
    _, cols = _columns(csv_path)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    plot = ax.loglog if loglog else ax.plot
    plot(cols[x_col], cols[y_col], "o-", lw=1.2)
    ax.set_xlabel(x_col)
    ax.set_ylabel(y_col)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return Path(out_path)
