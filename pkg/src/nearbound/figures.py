"""Report figures rendered from experiment results.

One similarity, one reduction, and one reward figure per environment, saved
as PNG next to the CSV report. Uses the same per-action palette as the SVG
emitters for visual consistency.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluate import EvaluationReport, MODEL_ORDER
from .viz import PALETTE

__all__ = ["render_report_figures"]

_STYLE = {
    "teacher": dict(color="black", linestyle="--", marker=""),
    "brute": dict(color=PALETTE[0], marker="o"),
    "kd": dict(color=PALETTE[1], marker="s"),
    "ball": dict(color=PALETTE[2], marker="^"),
    "dt_entropy_l5": dict(color=PALETTE[3], marker="v", linestyle=":"),
    "dt_entropy_l10": dict(color=PALETTE[4], marker="<", linestyle=":"),
    "dt_gini_l5": dict(color=PALETTE[5], marker=">", linestyle=":"),
    "dt_gini_l10": dict(color=PALETTE[6], marker="d", linestyle=":"),
}


def _series(reports, env, model, value):
    pts = {}
    for r in reports:
        if r.error is None and r.env == env and r.model == model:
            pts.setdefault(r.size, []).append(value(r))
    sizes = sorted(pts)
    return sizes, [float(np.mean(pts[s])) for s in sizes]


def render_report_figures(reports: list[EvaluationReport], outdir) -> list[str]:
    """Write per-environment summary figures; returns the file paths."""
    written: list[str] = []
    envs = sorted({r.env for r in reports if r.error is None})
    models = [m for m in MODEL_ORDER if any(r.model == m for r in reports)]
    for env in envs:
        specs = [
            ("similarity", "decision accuracy vs teacher", lambda r: r.similarity.acc),
            ("reduction", "retained fraction of raw pool", lambda r: r.retained_fraction),
            ("reward", "mean accumulated reward", lambda r: r.mean_return_student),
        ]
        for tag, ylabel, value in specs:
            fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=150)
            for model in models:
                if tag == "reduction" and model not in ("brute",):
                    continue  # one curve: the condensed pool is shared
                sizes, vals = _series(reports, env, model, value)
                if not sizes:
                    continue
                label = "condensed pool" if tag == "reduction" else model
                ax.plot(sizes, vals, label=label, linewidth=1.3,
                        markersize=4, **_STYLE.get(model, {}))
            ax.set_xlabel("experiences collected")
            ax.set_ylabel(ylabel)
            ax.set_title(f"{env}: {ylabel}")
            ax.set_xscale("log")
            if tag == "similarity":
                ax.set_ylim(0.0, 1.05)
            ax.grid(True, alpha=0.3)
            ax.legend(fontsize=7)
            fig.tight_layout()
            path = os.path.join(outdir, f"fig_{tag}_{env}.png")
            fig.savefig(path)
            plt.close(fig)
            written.append(path)
    return written
