"""Deterministic SVG figures of packings, flexes and diagnostics (matplotlib, Agg backend).

Every drawn element carries an SVG id: ``disk-i``, ``center-i``,
``contact-i-j`` and ``flex-i``, so figures can be inspected by counting.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Circle, FancyArrow  # noqa: E402

from .packing import ContactGraph, DiskPacking  # noqa: E402

STYLE = {
    "svg.hashsalt": "stickydisks",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
}

SIGN_COLORS = {1: "tab:red", -1: "tab:blue", 0: "0.5"}


def save_svg(fig, path) -> Path:
    path = Path(path)
    with plt.rc_context(STYLE):
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def draw_packing(ax, packing: DiskPacking, graph: Optional[ContactGraph] = None,
                 edge_values=None, flex=None, flex_scale: Optional[float] = None):
    """Disks, centers, contact segments; optional per-edge sign colors and flex arrows.

    ``edge_values`` (one number per edge) colors segments by sign.
    ``flex`` is an n x 2 velocity field drawn as arrows of length
    ``flex_scale * |p'_i|``; by default the scale makes the longest arrow
    half the smallest radius.
    """
    p, r = packing.centers, packing.radii
    boundary = set(packing.boundary or ())
    for i in range(packing.n):
        face = "0.85" if i in boundary else "none"
        c = Circle(p[i], r[i], facecolor=face, edgecolor="k", linewidth=0.8)
        c.set_gid(f"disk-{i}")
        ax.add_patch(c)
        dot = Circle(p[i], 0.04 * r.min(), facecolor="k", edgecolor="none")
        dot.set_gid(f"center-{i}")
        ax.add_patch(dot)
    if graph is not None:
        vals = None if edge_values is None else np.sign(np.asarray(edge_values, dtype=float))
        for k, (i, j) in enumerate(graph.edges):
            color = "k" if vals is None else SIGN_COLORS[int(vals[k])]
            (line,) = ax.plot(*p[[i, j]].T, color=color, linewidth=1.4)
            line.set_gid(f"contact-{i}-{j}")
    if flex is not None:
        v = np.asarray(flex, dtype=float).reshape(packing.n, 2)
        vmax = float(np.linalg.norm(v, axis=1).max())
        if flex_scale is None:
            flex_scale = 0.5 * float(r.min()) / vmax if vmax > 0 else 1.0
        for i in range(packing.n):
            d = flex_scale * v[i]
            if np.hypot(*d) == 0:
                continue
            arr = FancyArrow(p[i, 0], p[i, 1], d[0], d[1], width=0.02 * r.min(),
                             length_includes_head=True, head_width=0.1 * r.min(), color="tab:green")
            arr.set_gid(f"flex-{i}")
            ax.add_patch(arr)
    lo = (p - r[:, None]).min(axis=0)
    hi = (p + r[:, None]).max(axis=0)
    pad = 0.05 * float((hi - lo).max())
    ax.set_xlim(lo[0] - pad, hi[0] + pad)
    ax.set_ylim(lo[1] - pad, hi[1] + pad)
    ax.set_aspect("equal")
    ax.set_axis_off()
    return flex_scale


def packing_figure(packing: DiskPacking, graph: Optional[ContactGraph] = None, title: Optional[str] = None,
                   **kwargs):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 5))
        draw_packing(ax, packing, graph, **kwargs)
        if title:
            ax.set_title(title)
    return fig


def render_packing(path, packing: DiskPacking, graph: Optional[ContactGraph] = None, **kwargs) -> Path:
    return save_svg(packing_figure(packing, graph, **kwargs), path)


def singular_value_figure(s, threshold: float, title: str = "singular values"):
    """Log-scale singular values with the rank threshold marked."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3))
        s = np.asarray(s, dtype=float)
        ax.semilogy(np.arange(1, len(s) + 1), np.maximum(s, np.finfo(float).tiny), "o", ms=3, color="k")
        if threshold > 0:
            ax.axhline(threshold, color="tab:red", linewidth=0.8, label="rank threshold")
            ax.legend(frameon=False)
        ax.set_xlabel("index")
        ax.set_ylabel("sigma")
        ax.set_title(title)
    return fig


def trajectory_figure(steps, displacement, residuals):
    """Quotiented displacement and contact residual against step index."""
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5, 4.5), sharex=True)
        ax1.plot(steps, displacement, color="k", linewidth=1)
        ax1.set_ylabel("nontrivial displacement")
        res = np.maximum(np.asarray(residuals, dtype=float), np.finfo(float).tiny)
        ax2.semilogy(steps, res, color="tab:blue", linewidth=1)
        ax2.set_ylabel("max relative gap")
        ax2.set_xlabel("step")
    return fig
