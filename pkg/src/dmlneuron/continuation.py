"""Pseudo-arclength continuation of planar equilibria in ``I`` or ``gamma``.

The branch is traced in ``u = (x, y, lam)`` with a tangent predictor and a
Newton corrector on the extended system ``F(u) = 0``,
``t . (u - u_pred) = 0``. The determinant and trace of the Jacobian are
monitored along the way; a sign change of either is refined into a fold,
a Hopf point or a neutral saddle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .equilibria import Equilibrium, Stability, _stability, classify_equilibrium
from .model import OriginalParams, Partials, higher_partials, jacobian_original

__all__ = [
    "FreeParam",
    "BifurcationKind",
    "BranchPoint",
    "BifurcationPoint",
    "Branch",
    "ContinuationSettings",
    "continue_equilibrium",
    "locate_fold",
    "locate_hopf",
    "first_lyapunov_coefficient",
    "lyapunov_from_partials",
    "lyapunov_canonical",
    "cycle_envelope",
    "orbit_extent",
    "CycleSample",
    "HopfCycleScan",
    "hopf_cycle_scan",
    "hopf_width_slope",
]

NEWTON_TOL = 1e-12
NEWTON_MAXIT = 25
LOCATE_TOL = 1e-10
LOCATE_MAXIT = 50
STATE_BOX = 5.0


class FreeParam(str, Enum):
    I = "I"
    GAMMA = "gamma"


class BifurcationKind(str, Enum):
    FOLD = "fold"
    HOPF = "hopf"
    NEUTRAL_SADDLE = "neutral_saddle"
    CUSP = "cusp"
    GENERALIZED_HOPF = "generalized_hopf"


@dataclass(frozen=True)
class ContinuationSettings:
    h0: float = 1e-3
    h_min: float = 1e-6
    h_max: float = 1e-2
    grow: float = 1.3
    grow_after: int = 3
    max_points: int = 200_000


@dataclass(frozen=True)
class BranchPoint:
    """One converged equilibrium on a branch.

    ``tangent``, ``h_next`` and ``streak`` hold the step controller state so
    that continuation can resume from this point exactly.
    """

    x: float
    y: float
    param: float
    trace: float
    det: float
    stability: Stability
    tangent: tuple[float, float, float] = (0.0, 0.0, 0.0)
    h_next: float = 0.0
    streak: int = 0

    @property
    def u(self) -> np.ndarray:
        return np.array([self.x, self.y, self.param])

    @property
    def state(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class BifurcationPoint:
    kind: BifurcationKind
    x: float
    y: float
    I: float
    gamma: float
    eigenvalues: tuple[complex, complex] = ()
    trace: float = math.nan
    det: float = math.nan
    l1: float | None = None
    note: str = ""

    @property
    def state(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "x": self.x,
            "y": self.y,
            "I": self.I,
            "gamma": self.gamma,
            "trace": self.trace,
            "det": self.det,
            "eigenvalues": [[ev.real, ev.imag] for ev in self.eigenvalues],
            "l1": self.l1,
            "note": self.note,
        }


@dataclass
class Branch:
    free_param: FreeParam
    params: OriginalParams
    points: list[BranchPoint] = field(default_factory=list)
    bifurcations: list[BifurcationPoint] = field(default_factory=list)
    status: str = "complete"

    def __len__(self):
        return len(self.points)

    def array(self) -> np.ndarray:
        """Rows of ``(param, x, y, trace, det)``."""
        return np.array([[q.param, q.x, q.y, q.trace, q.det] for q in self.points])

    def of_kind(self, kind: BifurcationKind) -> list[BifurcationPoint]:
        return [b for b in self.bifurcations if b.kind == kind]


def _params_at(p: OriginalParams, free: FreeParam, lam: float) -> OriginalParams:
    return replace(p, I=lam) if free == FreeParam.I else replace(p, gamma=lam)


class _System:
    """Extended map ``u = (x, y, lam) -> F`` with its 2x3 Jacobian."""

    def __init__(self, p: OriginalParams, free: FreeParam):
        self.p = p
        self.free = free

    def split(self, lam: float) -> tuple[float, float]:
        if self.free == FreeParam.I:
            return lam, self.p.gamma
        return self.p.I, lam

    def F(self, u: np.ndarray) -> np.ndarray:
        x, y, lam = u
        I, gamma = self.split(lam)
        return np.array([
            x * x * (1.0 - x) - y + I,
            self.p.A * math.exp(self.p.alpha * x) - gamma * y,
        ])

    def DF(self, u: np.ndarray) -> np.ndarray:
        x, y, lam = u
        _, gamma = self.split(lam)
        e = self.p.A * self.p.alpha * math.exp(self.p.alpha * x)
        dlam = (1.0, 0.0) if self.free == FreeParam.I else (0.0, -y)
        return np.array([
            [2.0 * x - 3.0 * x * x, -1.0, dlam[0]],
            [e, -gamma, dlam[1]],
        ])

    def test_functions(self, u: np.ndarray) -> tuple[float, float]:
        x, _, lam = u
        _, gamma = self.split(lam)
        a = 2.0 * x - 3.0 * x * x
        e = self.p.A * self.p.alpha * math.exp(self.p.alpha * x)
        return a - gamma, -gamma * a + e

    def tangent(self, u: np.ndarray, ref: np.ndarray | None) -> np.ndarray:
        D = self.DF(u)
        if ref is None:
            t = np.cross(D[0], D[1])
        else:
            t = np.linalg.solve(np.vstack([D, ref]), np.array([0.0, 0.0, 1.0]))
        t = t / np.linalg.norm(t)
        if ref is not None and np.dot(t, ref) < 0:
            t = -t
        return t

    def correct(self, u_pred: np.ndarray, t: np.ndarray) -> np.ndarray | None:
        u = u_pred.copy()
        for _ in range(NEWTON_MAXIT):
            Fu = self.F(u)
            G = np.array([Fu[0], Fu[1], np.dot(t, u - u_pred)])
            if max(abs(Fu[0]), abs(Fu[1])) < NEWTON_TOL and abs(G[2]) < NEWTON_TOL:
                return u
            try:
                du = np.linalg.solve(np.vstack([self.DF(u), t]), G)
            except np.linalg.LinAlgError:
                return None
            u = u - du
            if not np.all(np.isfinite(u)):
                return None
        Fu = self.F(u)
        if max(abs(Fu[0]), abs(Fu[1])) < NEWTON_TOL:
            return u
        return None

    def point(self, u, t, h_next=0.0, streak=0) -> BranchPoint:
        tr, det = self.test_functions(u)
        return BranchPoint(
            float(u[0]), float(u[1]), float(u[2]), tr, det,
            _stability(tr, det, tr * tr - 4.0 * det),
            tuple(float(v) for v in t), h_next, streak,
        )

    def fix_param(self, u: np.ndarray, lam: float) -> np.ndarray | None:
        """Newton on ``F = 0`` with the parameter frozen at ``lam``."""
        v = np.array([u[0], u[1], lam])
        for _ in range(NEWTON_MAXIT):
            Fv = self.F(v)
            if max(abs(Fv[0]), abs(Fv[1])) < NEWTON_TOL:
                return v
            try:
                dv = np.linalg.solve(self.DF(v)[:, :2], Fv)
            except np.linalg.LinAlgError:
                return None
            v[:2] -= dv
        return None


def continue_equilibrium(
    start: Equilibrium | BranchPoint,
    p: OriginalParams,
    free: FreeParam | str,
    range_: tuple[float, float],
    h0: float | None = None,
    h_min: float = 1e-6,
    h_max: float = 1e-2,
    direction: int = 1,
    detect: bool = True,
) -> Branch:
    """Trace the equilibrium branch through ``start`` across ``range_``.

    Parameters
    ----------
    start : Equilibrium or BranchPoint
        Starting equilibrium at parameter values ``p``. A ``BranchPoint``
        taken from an earlier branch resumes with its stored tangent and
        step-size state, reproducing the rest of that branch.
    free : {"I", "gamma"}
        Parameter varied along the branch; the other stays fixed at ``p``.
    range_ : (float, float)
        Parameter interval. Tracing stops once the parameter leaves it, the
        last point being corrected onto the boundary.
    direction : {+1, -1}
        Initial direction of travel in the parameter (ignored when resuming).

    Returns
    -------
    Branch
        ``status`` is ``"complete"``, ``"corrector_failed"`` (step halved
        below ``h_min``), ``"left_state_box"`` (|x| or |y| > 5) or
        ``"max_points"``.
    """
    free = FreeParam(free)
    lo, hi = sorted(map(float, range_))
    settings = ContinuationSettings(h0=h0 if h0 is not None else 1e-3, h_min=h_min, h_max=h_max)
    sys = _System(p, free)

    if isinstance(start, BranchPoint):
        u = start.u
        t = np.array(start.tangent)
        h = start.h_next
        streak = start.streak
        if not np.any(t) or h <= 0:
            raise ValueError("BranchPoint lacks controller state; start from an Equilibrium instead")
        first = start
    else:
        lam0 = p.I if free == FreeParam.I else p.gamma
        u = np.array([start.x, start.y, lam0])
        t = sys.tangent(u, None)
        if t[2] * direction < 0 or (t[2] == 0 and direction < 0):
            t = -t
        h = settings.h0
        streak = 0
        first = sys.point(u, t, h, 0)
    if not lo <= u[2] <= hi:
        raise ValueError(f"start parameter {u[2]!r} lies outside range [{lo!r}, {hi!r}]")
    res = np.max(np.abs(sys.F(u)))
    if res > 1e-10:
        raise ValueError(f"start is not an equilibrium (residual {res:.3e})")

    branch = Branch(free, p, [first])
    while True:
        if len(branch.points) >= settings.max_points:
            branch.status = "max_points"
            break
        u_new = None
        while h >= settings.h_min:
            u_pred = u + h * t
            u_new = sys.correct(u_pred, t)
            if u_new is not None:
                t_new = sys.tangent(u_new, t)
                if np.dot(t_new, t) > 0.9:
                    break
            u_new = None
            h *= 0.5
            streak = 0
        if u_new is None:
            branch.status = "corrector_failed"
            break
        streak += 1
        h_used = h
        if streak >= settings.grow_after:
            h = min(h * settings.grow, settings.h_max)
            streak = 0
        if not lo <= u_new[2] <= hi:
            bound = hi if u_new[2] > hi else lo
            v = sys.fix_param(u + (bound - u[2]) / (u_new[2] - u[2]) * (u_new - u), bound)
            if v is not None:
                _append(branch, sys, v, sys.tangent(v, t_new), h, streak, h_used, detect)
            break
        _append(branch, sys, u_new, t_new, h, streak, h_used, detect)
        u, t = u_new, t_new
        if abs(u[0]) > STATE_BOX or abs(u[1]) > STATE_BOX:
            branch.status = "left_state_box"
            break
    return branch


def _append(branch, sys, u, t, h_next, streak, h_used, detect):
    a = branch.points[-1]
    b = sys.point(u, t, h_next, streak)
    branch.points.append(b)
    if not detect:
        return
    found = []
    if (a.det > 0) != (b.det > 0):
        found.append(locate_fold(a, b, sys.p, branch.free_param))
    if (a.trace > 0) != (b.trace > 0):
        found.append(locate_hopf(a, b, sys.p, branch.free_param))
    found.sort(key=lambda q: abs(q.I - a.param) if branch.free_param == FreeParam.I else abs(q.gamma - a.param))
    branch.bifurcations.extend(found)


def _locate(a: BranchPoint, b: BranchPoint, sys: _System, which: int) -> np.ndarray:
    """Illinois-safeguarded secant on a test function along the arc from ``a``.

    ``which`` selects the test function: 0 for the trace, 1 for the determinant.
    """
    ua, ta = a.u, np.array(a.tangent)
    # arclength of b measured along a's tangent
    s_b = float(np.dot(ta, b.u - ua))

    def at(s):
        if s == 0.0:
            return ua
        if s == s_b:
            return b.u
        return sys.correct(ua + s * ta, ta)

    s0, s1 = 0.0, s_b
    g0 = sys.test_functions(ua)[which]
    g1 = sys.test_functions(b.u)[which]
    u_best = ua if abs(g0) < abs(g1) else b.u
    side = 0
    for _ in range(LOCATE_MAXIT):
        s = s1 - g1 * (s1 - s0) / (g1 - g0)
        u = at(s)
        if u is None:
            s = 0.5 * (s0 + s1)
            u = at(s)
            if u is None:
                raise RuntimeError("corrector failed while locating a bifurcation")
        g = sys.test_functions(u)[which]
        u_best = u
        if abs(g) < LOCATE_TOL:
            return u
        if (g > 0) == (g1 > 0):
            s1, g1 = s, g
            if side == -1:
                g0 *= 0.5
            side = -1
        else:
            s0, g0 = s, g
            if side == 1:
                g1 *= 0.5
            side = 1
    raise RuntimeError(
        f"bifurcation location did not converge in {LOCATE_MAXIT} iterations "
        f"(last test value {sys.test_functions(u_best)[which]:.3e})"
    )


def _bif_params(sys: _System, lam: float) -> tuple[float, float]:
    return sys.split(lam)


def locate_fold(a: BranchPoint, b: BranchPoint, p: OriginalParams, free: FreeParam | str) -> BifurcationPoint:
    """Fold (saddle-node) between two branch points whose determinants differ in sign."""
    free = FreeParam(free)
    if (a.det > 0) == (b.det > 0):
        raise ValueError("determinant does not change sign between the two points")
    sys = _System(p, free)
    u = _locate(a, b, sys, 1)
    I, gamma = sys.split(u[2])
    tr, det = sys.test_functions(u)
    e = classify_equilibrium((u[0], u[1]), replace(p, I=I, gamma=gamma))
    return BifurcationPoint(BifurcationKind.FOLD, float(u[0]), float(u[1]), I, gamma, e.eigenvalues, tr, det)


def locate_hopf(a: BranchPoint, b: BranchPoint, p: OriginalParams, free: FreeParam | str) -> BifurcationPoint:
    """Zero of the trace between two branch points.

    A genuine Hopf point (``det > 0``) carries its first Lyapunov
    coefficient; ``det < 0`` gives a neutral saddle. A determinant within
    1e-10 of zero is returned as a Hopf candidate noted as a possible
    Bogdanov-Takens point.
    """
    free = FreeParam(free)
    if (a.trace > 0) == (b.trace > 0):
        raise ValueError("trace does not change sign between the two points")
    sys = _System(p, free)
    u = _locate(a, b, sys, 0)
    I, gamma = sys.split(u[2])
    q = replace(p, I=I, gamma=gamma)
    tr, det = sys.test_functions(u)
    e = classify_equilibrium((u[0], u[1]), q)
    if abs(det) <= LOCATE_TOL:
        return BifurcationPoint(
            BifurcationKind.HOPF, float(u[0]), float(u[1]), I, gamma, e.eigenvalues, tr, det,
            note="det ~ 0: fold and Hopf coincide (Bogdanov-Takens suspect)",
        )
    if det < 0:
        return BifurcationPoint(BifurcationKind.NEUTRAL_SADDLE, float(u[0]), float(u[1]), I, gamma, e.eigenvalues, tr, det)
    omega = math.sqrt(det)
    ev = (complex(0.0, -omega), complex(0.0, omega))
    hb = BifurcationPoint(BifurcationKind.HOPF, float(u[0]), float(u[1]), I, gamma, ev, tr, det)
    return replace(hb, l1=first_lyapunov_coefficient(hb, q))


def lyapunov_from_partials(d: Partials) -> float:
    """First Lyapunov coefficient from derivatives at a Hopf equilibrium.

    Uses the projection formula

    ``l1 = Re[<p, C(q,q,qb)> - 2 <p, B(q, A^-1 B(q,qb))> + <p, B(qb, (2iw - A)^-1 B(q,q))>] / (2 w)``

    with ``A q = i w q``, ``A^T p = -i w p``, ``<q, q> = 1`` and ``<p, q> = 1``.
    This is the normalisation used by common continuation packages. The
    sign does not depend on it; the magnitude scales with ``|q|^2``.
    """
    A = d.jac
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if det <= 0:
        raise ValueError(f"not a Hopf point: det = {det!r} <= 0")
    w = math.sqrt(det)
    # eigenvector of A for i w: (A - i w) q = 0 with q = (-A01, A00 - i w)
    q = np.array([-A[0, 1], A[0, 0] - 1j * w])
    q = q / np.linalg.norm(q)
    pv = np.array([-A[1, 0], A[0, 0] + 1j * w])  # A^T p = -i w p
    pv = pv / np.conj(np.vdot(pv, q))
    qb = np.conj(q)
    B = d.bilinear
    C = d.trilinear
    h11 = np.linalg.solve(A, B(q, qb))
    h20 = np.linalg.solve(2j * w * np.eye(2) - A, B(q, q))
    c = np.vdot(pv, C(q, q, qb)) - 2.0 * np.vdot(pv, B(q, h11)) + np.vdot(pv, B(qb, h20))
    return float(c.real / (2.0 * w))


def lyapunov_canonical(d: Partials) -> float:
    """Cubic radial coefficient ``a`` of the planar normal form.

    The Jacobian is brought to ``[[0, -w], [w, 0]]`` with the basis
    ``T = [Im q, Re q]`` built from the same unit eigenvector as
    :func:`lyapunov_from_partials`, then the classical planar formula is
    applied to the transformed Taylor coefficients. In this basis
    ``l1 = 4 a / w``.
    """
    A = d.jac
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if det <= 0:
        raise ValueError(f"not a Hopf point: det = {det!r} <= 0")
    w = math.sqrt(det)
    q = np.array([-A[0, 1], A[0, 0] - 1j * w])
    q = q / np.linalg.norm(q)
    T = np.column_stack([q.imag, q.real])
    Ti = np.linalg.inv(T)
    H = np.einsum("ji,iab,ac,bd->jcd", Ti, d.hess, T, T)
    K = np.einsum("ji,iabc,ad,be,cf->jdef", Ti, d.third, T, T, T)
    f, g = 0, 1
    X, Y = 0, 1
    return (
        (K[f, X, X, X] + K[f, X, Y, Y] + K[g, X, X, Y] + K[g, Y, Y, Y]) / 16.0
        + (
            H[f, X, Y] * (H[f, X, X] + H[f, Y, Y])
            - H[g, X, Y] * (H[g, X, X] + H[g, Y, Y])
            - H[f, X, X] * H[g, X, X]
            + H[f, Y, Y] * H[g, Y, Y]
        ) / (16.0 * w)
    )


def first_lyapunov_coefficient(hopf: BifurcationPoint, p: OriginalParams) -> float:
    """First Lyapunov coefficient at a Hopf point; negative means supercritical.

    ``p`` supplies ``A`` and ``alpha``; ``I`` and ``gamma`` are taken from
    the bifurcation point itself.
    """
    q = replace(p, I=hopf.I, gamma=hopf.gamma)
    d = higher_partials((hopf.x, hopf.y), q)
    det = d.jac[0, 0] * d.jac[1, 1] - d.jac[0, 1] * d.jac[1, 0]
    if det <= 0:
        raise ValueError(f"first Lyapunov coefficient needs det > 0, got {det!r}")
    return lyapunov_from_partials(d)


@dataclass(frozen=True)
class CycleSample:
    param: float
    x_min: float
    x_max: float
    has_cycle: bool

    @property
    def width(self) -> float:
        return self.x_max - self.x_min


def orbit_extent(
    q: OriginalParams,
    s0,
    horizon: float = 3000.0,
    transient_fraction: float = 0.6,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> tuple[float, float]:
    """Min and max of ``x`` after the transient of one planar orbit."""
    from .model import original_field
    from .simulate import integrate_adaptive

    ts = integrate_adaptive(original_field(q), s0, (0.0, horizon), rtol=rtol, atol=atol, sample_dt=0.05)
    x = ts.window(transient_fraction * horizon).x
    return float(x.min()), float(x.max())


def cycle_envelope(
    p: OriginalParams,
    free: FreeParam | str,
    values,
    horizon: float = 3000.0,
    transient_fraction: float = 0.6,
    offset: tuple[float, float] = (1e-3, 0.0),
    rtol: float = 1e-9,
    atol: float = 1e-12,
    no_cycle_width: float = 1e-6,
) -> list[CycleSample]:
    """Post-transient ``x`` extremes of simulated orbits at each parameter value.

    Each run starts at an unstable focus or node (the least stable one if
    there are several; failing that, the equilibrium of largest trace)
    shifted by ``offset``. A run whose post-transient ``x`` range is below
    ``no_cycle_width`` is reported as having no cycle.
    """
    from .equilibria import find_equilibria

    free = FreeParam(free)
    out = []
    for lam in values:
        q = _params_at(p, free, float(lam))
        eqs = find_equilibria(q)
        if not eqs:
            raise RuntimeError(f"no equilibrium found at {free.value}={lam!r}")
        repelling = [e for e in eqs if e.det > 0 and e.trace > 0]
        e = max(repelling or eqs, key=lambda e: e.trace)
        lo, hi = orbit_extent(q, (e.x + offset[0], e.y + offset[1]), horizon, transient_fraction, rtol, atol)
        out.append(CycleSample(float(lam), lo, hi, hi - lo >= no_cycle_width))
    return out


@dataclass(frozen=True)
class HopfCycleScan:
    """Simulated cycle widths on the unstable side of a Hopf point.

    ``side`` is ``+1`` when the equilibrium loses stability as ``I``
    increases through the Hopf value and ``-1`` otherwise. ``slope``,
    ``intercept`` and ``r2`` describe the least-squares line of
    ``width**2`` against the distance ``deltas``.
    """

    hopf: BifurcationPoint
    side: int
    deltas: np.ndarray
    samples: list[CycleSample]
    slope: float
    intercept: float
    r2: float

    @property
    def widths(self) -> np.ndarray:
        return np.array([s.width for s in self.samples])


def _unstable_side(hopf: BifurcationPoint, p: OriginalParams, delta: float) -> int:
    from .equilibria import find_equilibria

    for side in (1, -1):
        q = replace(p, I=hopf.I + side * delta, gamma=hopf.gamma)
        e = min(find_equilibria(q), key=lambda e: abs(e.x - hopf.x))
        if e.trace > 0:
            return side
    raise ValueError(f"equilibrium near x={hopf.x!r} is not destabilised within |dI| = {delta!r}")


def hopf_cycle_scan(
    hopf: BifurcationPoint,
    p: OriginalParams,
    deltas,
    horizon: float = 10000.0,
    transient_fraction: float = 0.9,
    offset: tuple[float, float] = (1e-3, 0.0),
) -> HopfCycleScan:
    """Simulate just past a Hopf point and regress squared cycle width on ``|I - I_H|``.

    A supercritical Hopf gives a small stable cycle whose squared width
    grows linearly with the distance, so ``r2`` is close to 1 and the
    intercept close to 0. A subcritical one sends the orbit to a distant
    attractor and the widths do not follow the line.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size < 3 or np.any(deltas <= 0):
        raise ValueError("need at least three positive parameter distances")
    side = _unstable_side(hopf, p, float(deltas.min()))
    base = replace(p, gamma=hopf.gamma)
    samples = cycle_envelope(
        base, FreeParam.I, hopf.I + side * deltas, horizon=horizon,
        transient_fraction=transient_fraction, offset=offset,
    )
    w2 = np.array([s.width for s in samples]) ** 2
    slope, intercept = np.polyfit(deltas, w2, 1)
    ss_tot = float(np.sum((w2 - w2.mean()) ** 2))
    ss_res = float(np.sum((w2 - (slope * deltas + intercept)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return HopfCycleScan(hopf, side, deltas, samples, float(slope), float(intercept), r2)


def hopf_width_slope(hopf: BifurcationPoint, p: OriginalParams) -> float:
    """Normal-form prediction of ``d(width**2) / d|I - I_H|`` at a supercritical Hopf.

    With ``z' = (mu + i w) z + l1 w z |z|^2`` the cycle radius is
    ``sqrt(-mu / (l1 w))`` and the ``x`` width is ``4 |q_x|`` times that.
    Along the equilibrium branch ``d mu / dI = (1 - 3x) gamma / det``.
    """
    if hopf.l1 is None or not hopf.l1 < 0:
        raise ValueError(f"needs a supercritical Hopf point (l1 < 0), got l1={hopf.l1!r}")
    q = replace(p, I=hopf.I, gamma=hopf.gamma)
    A = jacobian_original((hopf.x, hopf.y), q)
    w = math.sqrt(hopf.det)
    qv = np.array([-A[0, 1], A[0, 0] - 1j * w])
    qx = abs(qv[0]) / np.linalg.norm(qv)
    dmu = abs((1.0 - 3.0 * hopf.x) * hopf.gamma / hopf.det)
    return float(16.0 * qx * qx * dmu / (-hopf.l1 * w))
