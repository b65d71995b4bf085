"""Optional matplotlib figures written next to the CSV output."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "sum_cap_line": dict(color="0.6", ls=":", lw=1.0),
    "outer_bound": dict(color="k", ls="-", lw=1.4),
    # a frontier point's r1 holds for every smaller r0
    "achievable_finite_n": dict(color="tab:blue", ls="-", lw=1.0, drawstyle="steps-pre"),
    "achievable_asymptotic": dict(color="tab:red", ls="--", lw=1.2),
}


def plot_region(curves: Sequence, path: str | Path, title: str | None = None) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for c in curves:
        r0, r1 = c.arrays()
        style = _STYLE.get(c.label, {})
        ax.plot(r0, r1, label=c.label.replace("_", " "), **style)
    ax.set_xlabel("$R_0$ [bits/use]")
    ax.set_ylabel("$R_1$ [bits/use]")
    ax.set_xlim(left=0)
    ax.set_ylim(bottom=0)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_sweep(rows: Sequence, path: str | Path) -> Path:
    path = Path(path)
    n = [r.n for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.semilogx(n, [r.rate_bits for r in rows], "o-", label="code rate")
    ax.semilogx(n, [r.achieved_rate_bits for r in rows], "s--", label="pipeline rate")
    ax.axhline(rows[0].capacity_bits, color="k", lw=0.8, label="capacity")
    ax.set_xlabel("block length n")
    ax.set_ylabel("bits/use")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
