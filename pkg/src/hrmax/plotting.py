"""Optional rendering of curve/contour report data to figure files.

The delimited output remains the primary interface; these helpers mirror it
visually with the usual color convention (actual in black, first order in
blue, second order in red).
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_curve", "render_contour"]

_SERIES_STYLE = {
    "actual": {"color": "black"},
    "L1": {"color": "tab:blue"},
    "L2": {"color": "tab:red"},
}


def render_curve(
    xs: Sequence[float],
    series: dict[str, Sequence[float]],
    path: str,
    title: str | None = None,
) -> None:
    """Line plot of the diagonal (x = y) report data."""
    fig, ax = plt.subplots(figsize=(7, 4.2))
    for name, values in series.items():
        ax.plot(xs, values, label=name, **_SERIES_STYLE.get(name, {}))
    ax.set_xlabel("x = y")
    ax.set_ylabel("probability")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_contour(
    xs: Sequence[float],
    ys: Sequence[float],
    series: dict[str, np.ndarray],
    path: str,
    title: str | None = None,
    levels: Sequence[float] = (0.1, 0.3, 0.5, 0.7, 0.9),
) -> None:
    """Overlaid contour lines of the rectangle report data.

    Each array in ``series`` is indexed [i, j] -> value at (xs[i], ys[j]).
    """
    fig, ax = plt.subplots(figsize=(5.4, 5.0))
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    for name, values in series.items():
        style = _SERIES_STYLE.get(name, {})
        ax.contour(X, Y, np.asarray(values), levels=list(levels),
                   colors=style.get("color", "gray"), linewidths=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    handles = [plt.Line2D([0], [0], color=_SERIES_STYLE.get(n, {}).get("color", "gray"), label=n)
               for n in series]
    ax.legend(handles=handles, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
