"""Matplotlib rendering of the policy comparison chart."""

from __future__ import annotations

import io
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import MetricsReport, format_3dp  # noqa: E402

BAR_COLORS = {
    "fcfs": "#8c8c8c",
    "sjf": "#4c72b0",
    "priority": "#dd8452",
    "hybrid": "#55a868",
}

# fixed hash salt and no date stamp: identical inputs give identical bytes
SVG_RC = {
    "svg.hashsalt": "baas-sim",
    "svg.fonttype": "none",
    "font.size": 10,
}


def comparison_svg(reports: Sequence[MetricsReport], width: float = 6.4,
                   height: float = 4.0) -> str:
    """Bar chart of average waiting time, one bar per report.

    Each bar is emitted as an SVG group with id ``bar-<policy>`` and is
    labeled with its value in ms, formatted as in the comparison CSV.
    """
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(width, height))
        names = [r.policy for r in reports]
        values = [float(r.avg_wait_ms) for r in reports]
        bars = ax.bar(range(len(reports)), values, width=0.6,
                      color=[BAR_COLORS.get(n, "#4c72b0") for n in names])
        for bar, rep in zip(bars, reports):
            bar.set_gid(f"bar-{rep.policy}")
            ax.annotate(format_3dp(rep.avg_wait_ms),
                        (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                        xytext=(0, 3), textcoords="offset points",
                        ha="center", va="bottom", fontsize=8)
        ax.set_xticks(range(len(reports)), [n.upper() for n in names])
        ax.set_ylabel("average waiting time (ms)")
        ax.set_title("Comparison among scheduling policies")
        ax.set_ylim(0, max(values + [1.0]) * 1.12)
        ax.spines["top"].set_visible(False)
        ax.spines["right"].set_visible(False)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()
