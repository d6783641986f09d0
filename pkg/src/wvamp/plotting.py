"""Figure rendering for scan output.

The report path draws the uncertainty-to-weak-value ratio against the
amplified weak value and saves it next to the CSV. Rendering is headless
(Agg) and purely cosmetic: the CSV stays the authoritative artifact.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_scan_figure(rows, path) -> bool:
    """Plot ratio_q versus |Re weak value|; returns False if nothing to plot."""
    xs = []
    ys = []
    for row in rows:
        if row.ratio_q is None or row.re_weak_value is None:
            continue
        x = abs(row.re_weak_value)
        if x > 0.0:
            xs.append(x)
            ys.append(row.ratio_q)
    if len(xs) < 2:
        return False

    order = sorted(range(len(xs)), key=xs.__getitem__)
    xs = [xs[i] for i in order]
    ys = [ys[i] for i in order]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(xs, ys, color="tab:blue", lw=1.6)
    ax.axhline(1.0, color="tab:red", ls="--", lw=1.0, label="significance threshold")
    inside = [x for x, y in zip(xs, ys) if y < 1.0]
    if inside:
        ax.axvspan(min(inside), max(inside), color="tab:green", alpha=0.12,
                   label="significant window")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("amplified |Re weak value|")
    ax.set_ylabel("uncertainty / |Re weak value|")
    ax.legend(loc="best", fontsize=9)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True
