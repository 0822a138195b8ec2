import re

import numpy as np
import pytest
from scipy.signal import find_peaks

from dmlneuron.codim2 import fold_curve, hopf_curve
from dmlneuron.equilibria import x_nullcline, y_nullcline
from dmlneuron.model import OriginalParams
from dmlneuron.plotting import plot_branch, plot_codim2, plot_nullclines, plot_time_series, render_svg
from dmlneuron.simulate import get_scenario


def _group_path(svg: str, gid: str) -> np.ndarray:
    """Vertices of the first path inside the group with id ``gid``."""
    start = svg.index(f'<g id="{gid}">')
    d = re.search(r'<path d="([^"]*)"', svg[start:]).group(1)
    nums = [float(v) for v in re.findall(r"-?\d+(?:\.\d+)?", d)]
    return np.array(nums).reshape(-1, 2)


def _nullcline_table(p=OriginalParams(gamma=0.2)):
    x = np.linspace(-0.4, 1.0, 301)
    return {"x": x, "y_x_nullcline": x_nullcline(x, p), "y_y_nullcline": y_nullcline(x, p)}


def test_nullcline_svg_is_byte_identical(tmp_path):
    a = plot_nullclines(_nullcline_table(), tmp_path / "a.svg")
    b = plot_nullclines(_nullcline_table(), tmp_path / "b.svg")
    assert a.read_bytes() == b.read_bytes()


def test_nullcline_svg_has_two_curves(tmp_path):
    eq = [{"x": 0.1, "y": 0.01, "stability": "stable-node"}]
    svg = plot_nullclines(_nullcline_table(), tmp_path / "n.svg", eq).read_text()
    assert svg.count('id="x-nullcline"') == 1
    assert svg.count('id="y-nullcline"') == 1
    assert svg.count('id="equilibrium"') == 1
    assert "<dc:date>" not in svg


def test_time_series_peaks_survive_rendering(tmp_path, series):
    ts = series("fig4c")
    table = {"t": ts.t, "x": ts.x, "y": ts.states[:, 1]}
    start = ts.meta["transient_end"]
    svg = plot_time_series(table, tmp_path / "ts.svg", t_start=start).read_text()
    xy = _group_path(svg, "x-trace")
    # SVG y grows downwards, so spikes are minima of the vertical coordinate
    peaks, _ = find_peaks(-xy[:, 1], prominence=0.3 * np.ptp(xy[:, 1]))
    assert len(peaks) >= 10
    assert '<g id="xy-projection">' in svg


def test_branch_svg_splits_by_stability(tmp_path):
    table = {
        "param": np.linspace(0, 1, 5),
        "x": np.linspace(0, 1, 5),
        "stability": np.array(["stable-node"] * 2 + ["saddle"] * 3, dtype=object),
    }
    bif = [{"kind": "fold", "I": 0.25, "gamma": 0.3, "x": 0.25}]
    svg = plot_branch(table, tmp_path / "b.svg", bif).read_text()
    assert 'id="branch-stable"' in svg and 'id="branch-unstable"' in svg
    assert 'id="bif-fold"' in svg


def test_codim2_svg_separates_neutral_saddles(tmp_path):
    p = OriginalParams()
    xs = np.linspace(0.01, 0.65, 400)
    fold = fold_curve(p, xs)
    hopf = hopf_curve(p, xs)
    ft = {k: np.array([getattr(q, a) for q in fold]) for k, a in (("I", "I"), ("gamma", "gamma"))}
    ht = {k: np.array([getattr(q, a) for q in hopf]) for k, a in (("I", "I"), ("gamma", "gamma"), ("genuine", "genuine"))}
    svg = plot_codim2(ft, ht, tmp_path / "c.svg").read_text()
    assert 'id="fold-curve"' in svg
    assert 'id="hopf-curve"' in svg
    assert 'id="neutral-saddle-curve"' in svg


def test_render_dispatch(tmp_path):
    out = render_svg("nullclines", tmp_path / "r.svg", _nullcline_table())
    assert out.read_text().startswith("<?xml")
    with pytest.raises(ValueError):
        render_svg("phase-portrait", tmp_path / "x.svg", _nullcline_table())


def test_forcing_period_in_scenario():
    assert get_scenario("fig4c").period == pytest.approx(2 * np.pi / 0.01)
