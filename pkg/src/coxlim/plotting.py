"""SVG pictures of limit-set samples in the affine chart (rank 3 and 4)."""

from __future__ import annotations

from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .chart import Chart  # noqa: E402

ELLIPSE_SAMPLES = 720


class UnsupportedRenderError(ValueError):
    pass


def _plane_frame(chart: Chart, view: Optional[np.ndarray] = None):
    """Orthonormal 2-frame of the picture plane inside V_0."""
    P = chart._perp  # n x (n-1)
    if chart.n == 3:
        return P
    # default: look along the last simple root (never parallel to o)
    view = np.eye(chart.n)[-1] if view is None else np.asarray(view, float)
    v = P.T @ view
    if np.linalg.norm(v) < 1e-12:
        raise ValueError("view direction is parallel to o")
    v /= np.linalg.norm(v)
    # basis of the complement of v inside the 3-dim direction space
    _, _, vt = np.linalg.svd(v[None])
    return P @ vt[1:].T


def render_limit_set(path, chart: Chart, points, view=None, title: Optional[str] = None) -> None:
    n = chart.n
    if n not in (3, 4):
        raise UnsupportedRenderError(f"cannot render rank {n}; only ranks 3 and 4")
    F = _plane_frame(chart, view)
    proj = lambda x: (np.asarray(x) - chart.o) @ F
    matplotlib.rcParams["svg.hashsalt"] = "coxlim"
    fig, ax = plt.subplots(figsize=(6, 6))
    verts = np.eye(n) / chart.o[:, None]  # normalized simple roots
    vp = proj(verts)
    if n == 3:
        ax.fill(vp[:, 0], vp[:, 1], facecolor="none", edgecolor="0.4", lw=0.8)
    else:
        for i in range(n):
            for j in range(i + 1, n):
                ax.plot(vp[[i, j], 0], vp[[i, j], 1], color="0.6", lw=0.6)
    for i, (x, y) in enumerate(vp):
        ax.annotate(str(i + 1), (x, y), fontsize=8, color="0.3")
    if n == 3:
        th = np.linspace(0, 2 * np.pi, ELLIPSE_SAMPLES)
        dirs = np.outer(np.cos(th), F[:, 0]) + np.outer(np.sin(th), F[:, 1])
        bd = proj(chart.boundary_point(dirs))
        ax.plot(bd[:, 0], bd[:, 1], color="tab:blue", lw=0.8)
    else:
        bd = proj(chart.boundary_sample(4000, np.random.default_rng(0)))
        ax.scatter(bd[:, 0], bd[:, 1], s=0.1, color="tab:blue", alpha=0.2, linewidths=0)
    pts = np.asarray(points).reshape(-1, n)
    if len(pts):
        pp = proj(pts)
        ax.scatter(pp[:, 0], pp[:, 1], s=0.5, color="k", linewidths=0)
    ax.plot(*proj(chart.o), "+", color="tab:red")
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.set_title(title, fontsize=9)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
