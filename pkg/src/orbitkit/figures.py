"""Matplotlib overview figures for the report path.

Figures are rendered reproducibly: a fixed id salt and no embedded date,
so two runs of the same report produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .setmap import Band, PointRule, Rectangle, Segment, SetValuedMap

_SALT = "orbitkit"


def save_map_figure(f: SetValuedMap, path: str) -> None:
    """Plot the pieces of the graph of F and save deterministically."""
    plt.rcParams["svg.hashsalt"] = _SALT
    fig, ax = plt.subplots(figsize=(5, 5))
    for p in f.pieces:
        if isinstance(p, Segment):
            xs = [float(p.domain.lo), float(p.domain.hi)]
            ys = [float(p.value_at(p.domain.lo)), float(p.value_at(p.domain.hi))]
            ax.plot(xs, ys, color="#1f4e9c", lw=2)
        elif isinstance(p, Rectangle):
            for lo, hi in p.value.components:
                if lo == hi:
                    ax.plot([float(p.domain.lo), float(p.domain.hi)],
                            [float(lo), float(lo)], color="#1f9c4e", lw=2)
                else:
                    ax.fill_between(
                        [float(p.domain.lo), float(p.domain.hi)],
                        float(lo), float(hi), color="#1f9c4e", alpha=0.35,
                        linewidth=0)
        elif isinstance(p, PointRule):
            for lo, hi in p.value.components:
                if lo == hi:
                    ax.plot([float(p.at)], [float(lo)], "o",
                            color="#9c1f1f", ms=4)
                else:
                    ax.plot([float(p.at), float(p.at)],
                            [float(lo), float(hi)], color="#9c1f1f", lw=2)
        elif isinstance(p, Band):
            xs = [float(p.domain.lo), float(p.domain.hi)]
            ax.fill_between(
                xs,
                [float(p.lower_at(p.domain.lo)), float(p.lower_at(p.domain.hi))],
                [float(p.upper_at(p.domain.lo)), float(p.upper_at(p.domain.hi))],
                color="#9c7a1f", alpha=0.35, linewidth=0)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_title(f.name or "map")
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
