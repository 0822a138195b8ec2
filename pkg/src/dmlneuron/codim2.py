"""Two-parameter picture in the ``(I, gamma)`` plane.

For the planar model both test functions are explicit along the
equilibrium manifold, so the fold and Hopf loci are parametrised by the
equilibrium abscissa ``x`` in ``(0, 2/3)``:

* fold (``det = 0``):  ``gamma = A alpha e^{alpha x} / (2x - 3x^2)``
* trace zero:          ``gamma = 2x - 3x^2``

and in both cases ``I = (A / gamma) e^{alpha x} - x^2 (1 - x)``. A trace-zero
point is a genuine Hopf point when ``A alpha e^{alpha x} > gamma^2`` and a
neutral saddle otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .continuation import BifurcationKind, BifurcationPoint, lyapunov_from_partials
from .equilibria import Equilibrium, find_equilibria
from .model import OriginalParams, higher_partials, original_field
from .simulate import integrate_adaptive

__all__ = [
    "ParamPlanePoint",
    "Region",
    "RegionReport",
    "fold_curve",
    "hopf_curve",
    "fold_points_at",
    "trace_zero_points_at",
    "find_cusp",
    "hopf_l1_along_curve",
    "hopf_point",
    "find_generalized_hopf",
    "find_all_generalized_hopf",
    "classify_region",
    "recover_fig2_gamma",
    "GammaFit",
]

X_MAX = 2.0 / 3.0


@dataclass(frozen=True)
class ParamPlanePoint:
    I: float
    gamma: float
    x_eq: float
    genuine: bool | None = None

    @property
    def y_eq(self) -> float:
        return self.x_eq**2 * (1.0 - self.x_eq) + self.I


def _check_grid(x_grid) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    bad = x[(x <= 0) | (x >= X_MAX) | (np.abs(2 * x - 3 * x * x) < 1e-12)]
    if bad.size:
        raise ValueError(f"abscissae outside (0, 2/3): {bad[:5].tolist()}")
    return x


def _I_on_manifold(x, gamma, p: OriginalParams):
    return p.A / gamma * np.exp(p.alpha * x) - x * x * (1.0 - x)


def fold_curve(p: OriginalParams, x_grid) -> list[ParamPlanePoint]:
    x = _check_grid(x_grid)
    gamma = p.A * p.alpha * np.exp(p.alpha * x) / (2 * x - 3 * x * x)
    I = _I_on_manifold(x, gamma, p)
    return [ParamPlanePoint(float(a), float(b), float(c)) for a, b, c in zip(I, gamma, x)]


def hopf_curve(p: OriginalParams, x_grid) -> list[ParamPlanePoint]:
    """Trace-zero locus, each point flagged genuine (``det > 0``) or not."""
    x = _check_grid(x_grid)
    gamma = 2 * x - 3 * x * x
    I = _I_on_manifold(x, gamma, p)
    genuine = p.A * p.alpha * np.exp(p.alpha * x) > gamma * gamma
    return [
        ParamPlanePoint(float(a), float(b), float(c), bool(d)) for a, b, c, d in zip(I, gamma, x, genuine)
    ]


def _fold_residual(x, gamma, p):
    return p.A * p.alpha * np.exp(p.alpha * x) - gamma * (2 * x - 3 * x * x)


def fold_points_at(gamma: float, p: OriginalParams, n_scan: int = 4000) -> list[ParamPlanePoint]:
    """Folds at fixed ``gamma``: roots in ``x`` of ``A alpha e^{alpha x} = gamma (2x - 3x^2)``."""

    xs = np.linspace(1e-9, X_MAX - 1e-9, n_scan + 1)
    r = _fold_residual(xs, gamma, p)
    out = []
    for i in np.nonzero(np.sign(r[:-1]) * np.sign(r[1:]) < 0)[0]:
        x = brentq(lambda s: _fold_residual(s, gamma, p), xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15)
        out.append(ParamPlanePoint(float(_I_on_manifold(x, gamma, p)), gamma, float(x)))
    return out


def trace_zero_points_at(gamma: float, p: OriginalParams) -> list[ParamPlanePoint]:
    """Trace-zero points at fixed ``gamma``: ``x = (1 +- sqrt(1 - 3 gamma)) / 3``."""
    disc = 1.0 - 3.0 * gamma
    if disc < 0:
        return []
    s = math.sqrt(disc)
    xs = sorted({(1.0 - s) / 3.0, (1.0 + s) / 3.0})
    xs = [x for x in xs if 0 < x < X_MAX]
    return hopf_curve(p, xs) if xs else []


def find_cusp(p: OriginalParams) -> BifurcationPoint:
    """Cusp where the two fold branches meet.

    Along the fold locus ``gamma(x)`` is stationary at the cusp, which gives
    ``3 alpha x^2 - (2 alpha + 6) x + 2 = 0``.
    """
    a = 3.0 * p.alpha
    b = -(2.0 * p.alpha + 6.0)
    c = 2.0
    disc = b * b - 4 * a * c
    if disc < 0:
        raise ValueError("no admissible cusp: quadratic has no real root")
    s = math.sqrt(disc)
    # the root formula pair that avoids cancellation
    qq = -0.5 * (b + math.copysign(s, b))
    roots = [r for r in (qq / a, c / qq) if 0 < r < X_MAX]
    if not roots:
        raise ValueError("no admissible cusp: no root in (0, 2/3)")
    x = min(roots)
    pt = fold_curve(p, [x])[0]
    y = pt.y_eq
    return BifurcationPoint(BifurcationKind.CUSP, x, y, pt.I, pt.gamma, (0j, complex(-pt.gamma + 2 * x - 3 * x * x)),
                            2 * x - 3 * x * x - pt.gamma, 0.0)


def hopf_l1_along_curve(x: float, p: OriginalParams) -> float:
    """First Lyapunov coefficient at the trace-zero point generated by ``x``."""
    pt = hopf_curve(p, [x])[0]
    if not pt.genuine:
        raise ValueError(f"x={x!r} lies on the neutral-saddle part of the trace-zero locus")
    q = replace(p, I=pt.I, gamma=pt.gamma)
    return lyapunov_from_partials(higher_partials((x, pt.y_eq), q))


def hopf_point(x: float, p: OriginalParams) -> BifurcationPoint:
    """Genuine Hopf point generated by ``x`` on the trace-zero locus, with ``l1``."""
    pt = hopf_curve(p, [x])[0]
    l1 = hopf_l1_along_curve(x, p)
    w = math.sqrt(p.A * p.alpha * math.exp(p.alpha * x) - pt.gamma**2)
    return BifurcationPoint(
        BifurcationKind.HOPF, float(x), pt.y_eq, pt.I, pt.gamma,
        (complex(0, -w), complex(0, w)), 0.0, w * w, l1,
    )


def _genuine_interval(p: OriginalParams, n: int = 20000) -> list[tuple[float, float]]:
    xs = np.linspace(1e-6, X_MAX - 1e-6, n)
    g = p.A * p.alpha * np.exp(p.alpha * xs) - (2 * xs - 3 * xs * xs) ** 2
    ok = g > 0
    spans = []
    start = None
    for x, flag in zip(xs, ok):
        if flag and start is None:
            start = x
        if not flag and start is not None:
            spans.append((start, prev))
            start = None
        prev = x
    if start is not None:
        spans.append((start, xs[-1]))
    return spans


def find_all_generalized_hopf(p: OriginalParams, x_bracket: tuple[float, float] | None = None,
                              n_scan: int = 400) -> list[BifurcationPoint]:
    """Every zero of the first Lyapunov coefficient along the genuine Hopf locus.

    Scans ``l1`` on the genuine part of ``x_bracket`` (default: all of
    ``(0, 2/3)``) and refines each sign change with a bracketing root
    finder until ``|l1| < 1e-8``. Points are sorted by ``x``.
    """
    lo, hi = x_bracket if x_bracket is not None else (1e-6, X_MAX - 1e-6)
    found = []
    for a, b in _genuine_interval(p):
        a, b = max(a, lo), min(b, hi)
        if a >= b:
            continue
        xs = np.linspace(a, b, n_scan)
        ls = [hopf_l1_along_curve(float(x), p) for x in xs]
        for i in range(len(xs) - 1):
            if (ls[i] > 0) == (ls[i + 1] > 0):
                continue
            xm = brentq(hopf_l1_along_curve, float(xs[i]), float(xs[i + 1]), args=(p,), xtol=1e-15, rtol=1e-15)
            lm = hopf_l1_along_curve(xm, p)
            if abs(lm) >= 1e-8:
                raise RuntimeError(f"l1 refinement stalled at x={xm!r} with l1={lm!r}")
            pt = hopf_curve(p, [xm])[0]
            w = math.sqrt(p.A * p.alpha * math.exp(p.alpha * xm) - pt.gamma**2)
            found.append(BifurcationPoint(
                BifurcationKind.GENERALIZED_HOPF, xm, pt.y_eq, pt.I, pt.gamma,
                (complex(0, -w), complex(0, w)), 0.0, w * w, lm,
            ))
    return found


def find_generalized_hopf(p: OriginalParams, x_bracket: tuple[float, float] | None = None,
                          n_scan: int = 400) -> BifurcationPoint:
    """Generalized Hopf point of smallest ``x`` in ``x_bracket``.

    Raises ``ValueError`` when ``l1`` keeps one sign on the genuine part of
    the bracket.
    """
    pts = find_all_generalized_hopf(p, x_bracket, n_scan)
    if not pts:
        raise ValueError("first Lyapunov coefficient does not change sign on the genuine Hopf locus in the bracket")
    return pts[0]


class Region(str, Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class RegionReport:
    I: float
    gamma: float
    equilibria: list[Equilibrium]
    cycle_present: bool
    region: Region
    cycle_widths: list[float] = field(default_factory=list)

    @property
    def n_equilibria(self) -> int:
        return len(self.equilibria)

    @property
    def n_stable(self) -> int:
        return sum(e.stable for e in self.equilibria)

    def to_dict(self) -> dict:
        return {
            "I": self.I,
            "gamma": self.gamma,
            "n_equilibria": self.n_equilibria,
            "n_stable": self.n_stable,
            "stabilities": [e.stability.value for e in self.equilibria],
            "cycle_present": self.cycle_present,
            "region": self.region.value,
        }


_SEED_OFFSETS = [(1e-3, 0.0), (0.0, 1e-3), (-1e-3, 0.0)]
PERSISTENCE = 0.9


def _persistent_width(q: OriginalParams, s0, horizon: float, transient_fraction: float = 0.6) -> float:
    """Late ``x`` range of an orbit, or 0 if it is still shrinking.

    The post-transient window is halved; a weakly damped focus leaves a
    ring whose width decays between the halves, while a cycle keeps it.
    """
    ts = integrate_adaptive(original_field(q), s0, (0.0, horizon), rtol=1e-9, atol=1e-12, sample_dt=0.05)
    t0 = transient_fraction * horizon
    mid = 0.5 * (t0 + horizon)
    early = ts.window(t0, mid).x
    late = ts.window(mid).x
    w_early = float(early.max() - early.min())
    w_late = float(late.max() - late.min())
    return w_late if w_late >= PERSISTENCE * w_early else 0.0


def classify_region(I: float, gamma: float, p: OriginalParams, horizon: float = 3000.0,
                    cycle_width: float = 1e-6) -> RegionReport:
    """Assign ``(I, gamma)`` to one of the four regions of the parameter plane.

    R1: one stable equilibrium, no cycle. R2: three equilibria, two stable,
    no cycle. R3: three equilibria with a stable cycle. R4: one unstable
    equilibrium with a stable cycle. Anything else is ``unclassified``.

    Cycles are sought from three seeds, each offset by 1e-3 from an
    equilibrium (cycling through the equilibria), integrated over
    ``horizon`` with the first 60% discarded. A seed counts as cycling when
    its ``x`` range over the last 20% is at least ``cycle_width`` and has
    not shrunk below 90% of the range over the preceding 20%.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma!r}")
    q = replace(p, I=float(I), gamma=float(gamma))
    eqs = find_equilibria(q)
    widths = []
    for i, off in enumerate(_SEED_OFFSETS):
        e = eqs[i % len(eqs)]
        widths.append(_persistent_width(q, (e.x + off[0], e.y + off[1]), horizon))
    cycle = max(widths) >= cycle_width
    n = len(eqs)
    n_stable = sum(e.stable for e in eqs)
    if n == 1 and n_stable == 1 and not cycle:
        region = Region.R1
    elif n == 3 and n_stable == 2 and not cycle:
        region = Region.R2
    elif n == 3 and cycle:
        region = Region.R3
    elif n == 1 and n_stable == 0 and cycle:
        region = Region.R4
    else:
        region = Region.UNCLASSIFIED
    return RegionReport(float(I), float(gamma), eqs, cycle, region, widths)


@dataclass(frozen=True)
class GammaFit:
    gamma: float
    score: float
    residuals: list[dict]

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "score": self.score, "residuals": self.residuals}


def _predictions(gamma: float, p: OriginalParams) -> dict[str, list[tuple[float, bool]]]:
    folds = [(pt.I, True) for pt in fold_points_at(gamma, p, n_scan=800)]
    hopfs = [(pt.I, bool(pt.genuine)) for pt in trace_zero_points_at(gamma, p)]
    return {"fold": folds, "hopf": hopfs}


def _match(targets: list[tuple[str, float]], gamma: float, p: OriginalParams):
    pred = _predictions(gamma, p)
    residuals = []
    score = 0.0
    for kind in ("fold", "hopf"):
        tg = [(i, v) for i, (k, v) in enumerate(targets) if k == kind]
        if not tg:
            continue
        cand = pred[kind]
        best = None
        # assignment of targets to distinct predictions, brute force (tiny sets)
        for perm in itertools.permutations(range(len(cand)), min(len(tg), len(cand))):
            cost = sum((tg[j][1] - cand[perm[j]][0]) ** 2 for j in range(len(perm)))
            if best is None or cost < best[0]:
                best = (cost, perm)
        perm = best[1] if best else ()
        for j, (idx, value) in enumerate(tg):
            if j < len(perm):
                I_pred, genuine = cand[perm[j]]
                r = I_pred - value
                score += r * r
                residuals.append({"index": idx, "kind": kind, "target": value, "predicted": I_pred,
                                  "residual": r, "genuine": genuine})
            else:
                score += 1.0
                residuals.append({"index": idx, "kind": kind, "target": value, "predicted": None,
                                  "residual": None, "genuine": None})
    residuals.sort(key=lambda d: d["index"])
    for d in residuals:
        del d["index"]
    return score, residuals


def recover_fig2_gamma(targets, p: OriginalParams, bracket: tuple[float, float] | None = None,
                       n_grid: int = 2000) -> GammaFit:
    """Fit the fixed ``gamma`` of a one-parameter ``I`` diagram to reported points.

    Parameters
    ----------
    targets : sequence of (kind, I)
        ``kind`` is ``"fold"`` or ``"hopf"``. A Hopf target may match a
        genuine Hopf point or a neutral saddle; which one is reported per
        target through the ``genuine`` flag.
    bracket : (float, float), optional
        Scan interval, default ``(gamma_cusp, 1/3)``.

    The score is the sum of squared differences between each target and its
    assigned prediction (distinct predictions per kind); an unmatched
    target costs 1. A grid scan is refined by a bounded Brent search.
    """
    targets = [(str(k).lower(), float(v)) for k, v in targets]
    if not targets:
        raise ValueError("need at least one target")
    for k, _ in targets:
        if k not in ("fold", "hopf"):
            raise ValueError(f"unknown target kind {k!r}")
    if bracket is None:
        g_lo = find_cusp(p).gamma
        bracket = (g_lo + 1e-9, 1.0 / 3.0)
    lo, hi = map(float, bracket)
    if hi <= lo:
        score, res = _match(targets, lo, p)
        return GammaFit(lo, score, res)
    grid = np.linspace(lo, hi, n_grid)
    scores = [_match(targets, float(g), p)[0] for g in grid]
    k = int(np.argmin(scores))
    a = float(grid[max(k - 1, 0)])
    b = float(grid[min(k + 1, n_grid - 1)])
    best_g, best_s = float(grid[k]), scores[k]
    if b > a:
        # Brent's bounded search: golden-section steps with parabolic acceleration
        r = minimize_scalar(lambda g: _match(targets, g, p)[0], bounds=(a, b), method="bounded",
                            options={"xatol": 1e-12})
        if r.fun < best_s:
            best_g, best_s = float(r.x), float(r.fun)
    score, res = _match(targets, best_g, p)
    return GammaFit(best_g, score, res)
