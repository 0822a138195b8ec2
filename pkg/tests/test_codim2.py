import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from dmlneuron.codim2 import (
    Region,
    classify_region,
    find_all_generalized_hopf,
    find_cusp,
    find_generalized_hopf,
    fold_curve,
    fold_points_at,
    hopf_curve,
    hopf_l1_along_curve,
    hopf_point,
    recover_fig2_gamma,
    trace_zero_points_at,
)
from dmlneuron.continuation import BifurcationKind, _unstable_side, continue_equilibrium, orbit_extent
from dmlneuron.equilibria import find_equilibria
from dmlneuron.model import OriginalParams, jacobian_original, rhs_original

P = OriginalParams()
xs_open = st.floats(0.01, 0.65)


def _det_trace(pt, p=P):
    q = replace(p, I=pt.I, gamma=pt.gamma)
    J = jacobian_original((pt.x_eq, pt.y_eq), q)
    return np.linalg.det(J), np.trace(J), rhs_original((pt.x_eq, pt.y_eq), q)


# closed-form curves


def test_fold_curve_example():
    (pt,) = fold_curve(P, [0.2])
    assert pt.gamma == pytest.approx(0.22192, abs=5e-6)
    assert pt.I == pytest.approx(0.02107, abs=5e-6)


def test_hopf_curve_examples():
    a, b = hopf_curve(P, [0.45, 0.2])
    assert a.gamma == pytest.approx(0.2925, abs=1e-12)
    # exact value 0.0392025; the quoted 0.03921 is off in the last digit
    assert a.I == pytest.approx(0.03921, abs=1e-5)
    assert a.genuine
    assert P.A * P.alpha * math.exp(P.alpha * 0.45) == pytest.approx(0.2324, abs=5e-5)
    assert b.gamma == pytest.approx(0.28, abs=1e-12)
    assert b.I == pytest.approx(0.01006, abs=5e-6)
    assert not b.genuine


def test_hopf_curve_peaks_at_one_third():
    pts = hopf_curve(P, np.linspace(0.01, 0.65, 6401))
    g = np.array([pt.gamma for pt in pts])
    assert g.max() == pytest.approx(1 / 3, abs=1e-8)
    assert pts[int(np.argmax(g))].x_eq == pytest.approx(1 / 3, abs=1e-4)
    assert np.all((g > 0) & (g <= 1 / 3 + 1e-15))


def test_fold_gamma_blows_up_at_two_thirds():
    g = [pt.gamma for pt in fold_curve(P, [2 / 3 - 1e-2, 2 / 3 - 1e-4, 2 / 3 - 1e-6])]
    assert g[0] < g[1] < g[2]
    assert g[2] > 1e3


@given(st.lists(xs_open, min_size=1, max_size=8))
def test_fold_construction_identity(xs):
    for pt in fold_curve(P, xs):
        det, _, f = _det_trace(pt)
        assert abs(det) < 1e-12
        assert np.max(np.abs(f)) < 1e-12
        assert pt.gamma > 0


@given(st.lists(xs_open, min_size=1, max_size=8))
def test_hopf_construction_identity(xs):
    for pt in hopf_curve(P, xs):
        det, tr, f = _det_trace(pt)
        assert abs(tr) < 1e-12
        assert np.max(np.abs(f)) < 1e-12
        assert pt.genuine == (det > 0)


@pytest.mark.parametrize("bad", [[0.0], [-0.1], [2 / 3], [0.7], [0.3, 1.0]])
def test_curves_reject_abscissae_outside(bad):
    with pytest.raises(ValueError):
        fold_curve(P, bad)
    with pytest.raises(ValueError):
        hopf_curve(P, bad)


def test_fold_curve_points_split_into_equilibrium_pairs():
    # a fold point is a double root; nudging I splits it into two nearby roots
    for pt in fold_curve(P, [0.1, 0.2, 0.3]):
        near = [
            [e.x for e in find_equilibria(replace(P, I=pt.I + s, gamma=pt.gamma)) if abs(e.x - pt.x_eq) < 1e-2]
            for s in (-1e-5, 1e-5)
        ]
        assert sorted(map(len, near)) == [0, 2]


# cusp


def test_cusp_example():
    cp = find_cusp(P)
    assert cp.kind is BifurcationKind.CUSP
    assert cp.x == pytest.approx(0.13942, abs=5e-6)
    # exact gamma 0.2046854; the quoted 0.20468 is truncated
    assert cp.gamma == pytest.approx(0.20468, abs=1e-5)
    assert cp.I == pytest.approx(0.02507, abs=5e-6)


def test_cusp_agrees_with_newton_on_det_and_its_slope():
    # det(x, g) = A a e^{ax} - g (2x - 3x^2); solve det = d det/dx = 0
    A, a = P.A, P.alpha
    x, g = 0.15, 0.2
    for _ in range(50):
        e = A * a * math.exp(a * x)
        F = np.array([e - g * (2 * x - 3 * x * x), a * e - g * (2 - 6 * x)])
        J = np.array([[a * e - g * (2 - 6 * x), -(2 * x - 3 * x * x)], [a * a * e + 6 * g, -(2 - 6 * x)]])
        step = np.linalg.solve(J, F)
        x, g = x - step[0], g - step[1]
        if np.max(np.abs(step)) < 1e-15:
            break
    cp = find_cusp(P)
    assert cp.x == pytest.approx(x, abs=1e-12)
    assert cp.gamma == pytest.approx(g, abs=1e-12)


def test_fold_count_changes_across_cusp():
    g = find_cusp(P).gamma
    assert len(fold_points_at(g - 0.01, P)) == 0
    assert len(fold_points_at(g + 0.05, P)) == 2


def test_fold_pair_merges_at_cusp():
    cp = find_cusp(P)
    gaps = []
    for dg in (1e-3, 1e-4, 1e-5):
        a, b = fold_points_at(cp.gamma + dg, P)
        gaps.append(abs(a.x_eq - b.x_eq))
        assert a.x_eq < cp.x < b.x_eq
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-2


# fixed-gamma inversions versus continuation


@pytest.mark.parametrize("gamma", [0.22, 0.28, 0.32])
def test_inversions_match_continuation(gamma):
    p = replace(P, gamma=gamma, I=-0.05)
    br = continue_equilibrium(find_equilibria(p)[0], p, "I", (-0.05, 0.2))
    folds = sorted(b.I for b in br.of_kind(BifurcationKind.FOLD))
    assert_allclose(folds, sorted(pt.I for pt in fold_points_at(gamma, P)), atol=1e-8, rtol=0)
    tz = trace_zero_points_at(gamma, P)
    detected = br.of_kind(BifurcationKind.HOPF) + br.of_kind(BifurcationKind.NEUTRAL_SADDLE)
    assert len(detected) == len(tz)
    for pt in tz:
        (hit,) = [b for b in detected if abs(b.I - pt.I) < 1e-8]
        assert (hit.kind is BifurcationKind.HOPF) == pt.genuine


# generalized Hopf


def test_two_generalized_hopf_points():
    gh = find_all_generalized_hopf(P)
    assert len(gh) == 2
    for pt in gh:
        assert pt.kind is BifurcationKind.GENERALIZED_HOPF
        assert abs(pt.l1) < 1e-8
        assert pt.det > 0
    assert gh[0].x < gh[1].x


@pytest.mark.parametrize("k", [0, 1])
def test_l1_changes_sign_across_generalized_hopf(k):
    pt = find_all_generalized_hopf(P)[k]
    left = hopf_l1_along_curve(pt.x - 1e-3, P)
    right = hopf_l1_along_curve(pt.x + 1e-3, P)
    assert left * right < 0


def test_find_generalized_hopf_returns_first():
    assert find_generalized_hopf(P).x == find_all_generalized_hopf(P)[0].x


def test_find_generalized_hopf_raises_without_sign_change():
    with pytest.raises(ValueError):
        find_generalized_hopf(P, x_bracket=(0.45, 0.6))


def test_neutral_saddle_has_no_l1():
    with pytest.raises(ValueError):
        hopf_l1_along_curve(0.2, P)


@pytest.mark.slow
def test_supercritical_side_has_small_stable_cycle():
    gh = find_generalized_hopf(P)
    hb = hopf_point(0.05, P)
    assert hb.x < gh.x and hb.l1 < 0
    q = replace(P, gamma=hb.gamma)
    side = _unstable_side(hb, q, 3e-4)
    q = replace(q, I=hb.I + side * 3e-4)
    (e,) = [e for e in find_equilibria(q) if abs(e.x - hb.x) < 0.01]
    inner = orbit_extent(q, (e.x + 1e-3, e.y), 8000, 0.9)
    outer = orbit_extent(q, (e.x + 0.2, e.y), 8000, 0.9)
    w_in, w_out = inner[1] - inner[0], outer[1] - outer[0]
    assert 1e-3 < w_in < 0.2
    assert w_in == pytest.approx(w_out, rel=1e-3)


@pytest.mark.slow
def test_subcritical_side_cycle_repels():
    gh = find_generalized_hopf(P)
    hb = hopf_point(0.105, P)
    assert hb.x > gh.x and hb.l1 > 0
    q = replace(P, gamma=hb.gamma)
    side = _unstable_side(hb, q, 2e-4)
    # below the Hopf a start just off the equilibrium falls back onto it
    before = replace(q, I=hb.I - side * 2e-4)
    (e,) = [e for e in find_equilibria(before) if abs(e.x - hb.x) < 0.01]
    lo, hi = orbit_extent(before, (e.x + 1e-3, e.y), 6000, 0.9)
    assert hi - lo < 1e-6
    # past it there is no small cycle to land on
    after = replace(q, I=hb.I + side * 2e-4)
    (e,) = [e for e in find_equilibria(after) if abs(e.x - hb.x) < 0.01]
    lo, hi = orbit_extent(after, (e.x + 1e-3, e.y), 6000, 0.9)
    assert hi - lo > 0.2


# regions


@pytest.mark.parametrize("I, gamma", [(0.0, 0.2), (10.0, 0.5), (0.06, 0.28)])
def test_region_one(I, gamma):
    r = classify_region(I, gamma, P)
    assert r.region is Region.R1
    assert r.n_equilibria == 1 and r.n_stable == 1
    assert not r.cycle_present


def test_region_one_large_current_equilibrium():
    r = classify_region(10.0, 0.5, P)
    # the exact root is x = 1.3352; a rounded 1.32 is quoted elsewhere
    assert r.equilibria[0].x == pytest.approx(1.32, abs=0.02)


def test_region_two_inside_fold_wedge():
    lo, hi = sorted(pt.I for pt in fold_points_at(0.32, P))
    assert lo < 0.013 < hi
    r = classify_region(0.013, 0.32, P)
    assert r.region is Region.R2
    assert r.n_equilibria == 3 and r.n_stable == 2


def test_region_three():
    # coordinates found by a grid scan of the fold wedge
    lo, hi = sorted(pt.I for pt in fold_points_at(0.3135, P))
    assert lo < 0.0121 < hi
    r = classify_region(0.0121, 0.3135, P)
    assert r.region is Region.R3
    assert r.n_equilibria == 3 and r.cycle_present
    assert max(r.cycle_widths) > 0.1


def test_region_four():
    r = classify_region(0.04, 0.25, P)
    assert r.region is Region.R4
    assert r.n_stable == 0 and max(r.cycle_widths) > 0.1


def test_three_equilibria_one_stable_no_cycle_is_unclassified():
    r = classify_region(0.012, 0.28, P)
    assert r.region is Region.UNCLASSIFIED
    assert r.to_dict()["region"] == "unclassified"


def test_region_rejects_nonpositive_gamma():
    with pytest.raises(ValueError):
        classify_region(0.0, 0.0, P)


def test_crossing_fold_changes_count_by_two():
    for pt in fold_points_at(0.28, P):
        n = [len(find_equilibria(replace(P, gamma=0.28, I=pt.I + s))) for s in (-1e-4, 1e-4)]
        assert abs(n[0] - n[1]) == 2


def test_crossing_genuine_hopf_toggles_one_stability():
    (hb,) = [pt for pt in trace_zero_points_at(0.28, P) if pt.genuine]
    counts = [sum(e.stable for e in find_equilibria(replace(P, gamma=0.28, I=hb.I + s))) for s in (-1e-4, 1e-4)]
    assert abs(counts[0] - counts[1]) == 1


# gamma recovery


def test_recover_fold_pair_reports_residuals():
    fit = recover_fig2_gamma([("fold", 0.0153), ("fold", 0.0109)], P)
    assert len(fit.residuals) == 2
    folds = sorted(pt.I for pt in fold_points_at(fit.gamma, P))
    assert fit.score == pytest.approx((folds[1] - 0.0153) ** 2 + (folds[0] - 0.0109) ** 2, rel=1e-9)
    assert fit.score < 1e-4


def test_recover_single_hopf_near_028():
    fit = recover_fig2_gamma([("hopf", 0.0541)], P)
    assert fit.gamma == pytest.approx(0.28, abs=0.01)
    (r,) = fit.residuals
    assert r["genuine"] and abs(r["residual"]) < 1e-7


def test_recover_zero_width_bracket():
    fit = recover_fig2_gamma([("hopf", 0.0541)], P, bracket=(0.28, 0.28))
    assert fit.gamma == 0.28
    (r,) = fit.residuals
    assert r["predicted"] == pytest.approx(0.0556098, abs=1e-6)


def test_recover_rejects_bad_targets():
    with pytest.raises(ValueError):
        recover_fig2_gamma([], P)
    with pytest.raises(ValueError):
        recover_fig2_gamma([("cusp", 0.01)], P)
