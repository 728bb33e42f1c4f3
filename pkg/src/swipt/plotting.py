"""Static SVG rendering of rate-energy regions and DC-output trajectories.

The plots are a thin layer over the CSV data. SVG ids are salted with a
fixed string and the date stamp is dropped, so the same numbers give the
same file.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .optimizer import RateEnergyPoint  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (4.8, 3.4),
    "svg.hashsalt": "swipt",
    "svg.fonttype": "none",
}


def _save(fig, path, manifest: dict | None) -> Path:
    meta = {"Date": None}
    if manifest is not None:
        meta["Description"] = json.dumps(manifest, sort_keys=True)
    fig.savefig(path, format="svg", bbox_inches="tight", metadata=meta)
    plt.close(fig)
    return Path(path)


def _xy(points: Sequence[RateEnergyPoint], normalize: bool):
    ok = [p for p in points if p.result is not None or p.status != "infeasible"]
    xs = [p.rate_per_tone if normalize else p.rate for p in ok]
    ys = [p.zdc for p in ok]
    return xs, ys


def plot_region(points: Sequence[RateEnergyPoint], path, *, normalize: bool = False,
                comparison: Sequence[RateEnergyPoint] | None = None,
                manifest: dict | None = None) -> Path:
    """Rate-energy boundary with the two extreme points labelled.

    Args:
        points: superposed-waveform boundary, sorted by rate.
        path: output SVG file.
        normalize: plot bits per tone instead of bits per symbol.
        comparison: optional OFDM-only boundary drawn dashed.
        manifest: run manifest stored in the SVG metadata.
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        xs, ys = _xy(points, normalize)
        ax.plot(xs, ys, "o-", ms=3, lw=1.2, label="multisine + OFDM")
        if comparison:
            cx, cy = _xy(comparison, normalize)
            ax.plot(cx, cy, "s--", ms=2.5, lw=1.0, label="OFDM only")
        if xs:
            ax.annotate("multisine only", (xs[0], ys[0]), textcoords="offset points",
                        xytext=(6, 2), fontsize=8)
            ax.annotate("water-filling", (xs[-1], ys[-1]), textcoords="offset points",
                        xytext=(-50, 8), fontsize=8)
        ax.set_xlabel("rate [bits/tone]" if normalize else "rate [bits/symbol]")
        ax.set_ylabel(r"$z_{DC}$")
        ax.ticklabel_format(axis="y", style="sci", scilimits=(-3, 3))
        ax.legend(frameon=False, fontsize=8)
        return _save(fig, path, manifest)


def plot_trajectory(trajectory: Sequence[float], path, manifest: dict | None = None) -> Path:
    """DC output after each successive-condensation iteration (iteration 0 is the start)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(range(len(trajectory)), trajectory, ".-", lw=1.0)
        ax.set_xlabel("iteration")
        ax.set_ylabel(r"$z_{DC}$")
        ax.ticklabel_format(axis="y", style="sci", scilimits=(-3, 3))
        return _save(fig, path, manifest)
