"""Deterministic SVG rendering of nullclines, branches, parameter-plane curves and series.

Every renderer takes plain column tables (as returned by
:func:`dmlneuron.files.read_table`), so figures can be rebuilt from the CSV
files alone. Output bytes depend only on the input data: the SVG hash
salt is fixed, the date stamp is dropped and no global pyplot state is
touched.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from matplotlib.backends.backend_svg import FigureCanvasSVG  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

import numpy as np  # noqa: E402

__all__ = [
    "RC",
    "plot_nullclines",
    "plot_branch",
    "plot_codim2",
    "plot_time_series",
    "render_svg",
]

RC = {
    "svg.hashsalt": "dmlneuron",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.2,
    "path.simplify": False,
}
FIGSIZE = (6.0, 4.5)
GAMMA_MAX = 0.36
BIF_LABEL = {"fold": "LP", "hopf": "HB", "neutral_saddle": "NS", "cusp": "CP", "generalized_hopf": "GH"}


def _save(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    FigureCanvasSVG(fig)
    with matplotlib.rc_context(RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    return path


def _figure(n_axes: int = 1, figsize=FIGSIZE):
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=figsize)
        axes = [fig.add_subplot(n_axes, 1, i + 1) for i in range(n_axes)]
    return fig, axes


def _runs(mask: np.ndarray):
    """Index ranges of constant ``mask``, overlapping by one sample so pieces join."""
    if mask.size == 0:
        return
    start = 0
    for i in range(1, mask.size + 1):
        if i == mask.size or mask[i] != mask[start]:
            yield bool(mask[start]), start, min(i + 1, mask.size)
            start = i


def plot_nullclines(table: dict, path, equilibria: list[dict] | None = None, title: str = "") -> Path:
    """Both nullclines over ``table['x']`` with equilibria marked.

    Stable equilibria are filled circles, the others open circles.
    """
    fig, (ax,) = _figure()
    ax.plot(table["x"], table["y_x_nullcline"], color="tab:blue", label="x' = 0", gid="x-nullcline")
    ax.plot(table["x"], table["y_y_nullcline"], color="tab:red", label="y' = 0", gid="y-nullcline")
    for e in equilibria or []:
        stable = e["stability"] in ("stable-node", "stable-focus")
        ax.plot([e["x"]], [e["y"]], "o", color="k", mfc="k" if stable else "w", ms=5, gid="equilibrium")
    lo = min(np.min(table["y_x_nullcline"]), 0.0)
    hi = np.max(table["y_x_nullcline"])
    pad = 0.1 * (hi - lo if hi > lo else 1.0)
    ax.set_ylim(lo - pad, hi + pad)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(loc="upper left", frameon=False)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_branch(table: dict, path, bifurcations: list[dict] | None = None,
                envelope: dict | None = None, free: str = "I", title: str = "") -> Path:
    """Equilibrium branch ``x`` against the free parameter.

    Stable stretches are solid, unstable ones dashed. ``envelope`` adds the
    simulated ``x`` extremes of attracting cycles.
    """
    fig, (ax,) = _figure()
    stable = np.isin(table["stability"].astype(str), ["stable-node", "stable-focus"])
    for is_stable, a, b in _runs(stable):
        ax.plot(table["param"][a:b], table["x"][a:b], color="k",
                ls="-" if is_stable else "--", gid="branch-stable" if is_stable else "branch-unstable")
    for bp in bifurcations or []:
        lam = bp["I"] if free == "I" else bp["gamma"]
        ax.plot([lam], [bp["x"]], "s", color="tab:red", ms=4, gid=f"bif-{bp['kind']}")
        ax.annotate(BIF_LABEL.get(bp["kind"], bp["kind"]), (lam, bp["x"]), xytext=(4, 4),
                    textcoords="offset points", fontsize=8)
    if envelope is not None and len(envelope["param"]):
        cyc = np.asarray(envelope["has_cycle"], dtype=bool)
        ax.plot(envelope["param"][cyc], envelope["x_max"][cyc], "o", color="tab:green", ms=2.5, gid="cycle-max")
        ax.plot(envelope["param"][cyc], envelope["x_min"][cyc], "o", color="tab:green", ms=2.5, gid="cycle-min")
    ax.set_xlabel(free)
    ax.set_ylabel("x")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_codim2(fold: dict, hopf: dict, path, points: list[dict] | None = None,
                regions: dict | None = None, title: str = "") -> Path:
    """Fold and Hopf loci in the ``(I, gamma)`` plane.

    The neutral-saddle part of the trace-zero locus is dotted. ``regions``
    (columns ``I``, ``gamma``, ``region``) is drawn as coloured dots.
    """
    fig, (ax,) = _figure()
    if regions is not None and len(regions["I"]):
        colours = {"R1": "#cfe2f3", "R2": "#f4cccc", "R3": "#d9ead3", "R4": "#fff2cc", "unclassified": "#cccccc"}
        names = regions["region"].astype(str)
        for name, c in colours.items():
            sel = names == name
            if np.any(sel):
                ax.plot(regions["I"][sel], regions["gamma"][sel], "s", color=c, ms=3, gid=f"region-{name}")
    ax.plot(fold["I"], fold["gamma"], color="tab:blue", label="fold", gid="fold-curve")
    genuine = np.asarray(hopf["genuine"], dtype=bool)
    for is_genuine, a, b in _runs(genuine):
        ax.plot(hopf["I"][a:b], hopf["gamma"][a:b], color="tab:red",
                ls="-" if is_genuine else ":", gid="hopf-curve" if is_genuine else "neutral-saddle-curve")
    for pt in points or []:
        ax.plot([pt["I"]], [pt["gamma"]], "o", color="k", ms=4, gid=f"point-{pt['kind']}")
        ax.annotate(BIF_LABEL.get(pt["kind"], pt["kind"]), (pt["I"], pt["gamma"]), xytext=(4, -10),
                    textcoords="offset points", fontsize=8)
    ax.set_xlabel("I")
    ax.set_ylabel("gamma")
    ax.set_ylim(0.0, GAMMA_MAX)
    shown = np.concatenate([fold["I"][fold["gamma"] <= GAMMA_MAX], hopf["I"][hopf["gamma"] <= GAMMA_MAX]])
    if shown.size:
        pad = 0.05 * (shown.max() - shown.min() or 1.0)
        ax.set_xlim(shown.min() - pad, shown.max() + pad)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_time_series(table: dict, path, t_start: float | None = None, title: str = "") -> Path:
    """``x(t)`` above the ``(x, y)`` projection, from ``t_start`` on."""
    t = table["t"]
    keep = t >= t_start if t_start is not None else np.ones_like(t, dtype=bool)
    fig, (ax_t, ax_p) = _figure(2, figsize=(6.0, 7.0))
    ax_t.plot(t[keep], table["x"][keep], color="k", lw=0.8, gid="x-trace")
    ax_t.set_xlabel("t")
    ax_t.set_ylabel("x")
    ax_p.plot(table["x"][keep], table["y"][keep], color="k", lw=0.6, gid="xy-projection")
    ax_p.set_xlabel("x")
    ax_p.set_ylabel("y")
    if title:
        ax_t.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


_RENDERERS = {
    "nullclines": plot_nullclines,
    "branch": plot_branch,
    "codim2": plot_codim2,
    "timeseries": plot_time_series,
}


def render_svg(kind: str, path, *tables, **options) -> Path:
    """Dispatch to the renderer named ``kind`` with data tables and options."""
    try:
        fn = _RENDERERS[kind]
    except KeyError:
        raise ValueError(f"unknown plot kind {kind!r}; known: {', '.join(_RENDERERS)}") from None
    return fn(*tables, path, **options) if kind == "codim2" else fn(tables[0], path, **options)
