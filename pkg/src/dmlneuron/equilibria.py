"""Nullclines, equilibria and their linear stability for the planar model."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import OriginalParams, jacobian_original, rhs_original

__all__ = [
    "Stability",
    "Equilibrium",
    "ConvergenceWarning",
    "x_nullcline",
    "y_nullcline",
    "equilibrium_residual",
    "find_equilibria",
    "classify_equilibrium",
]

MARGINAL_TOL = 1e-10
X_LO, X_HI, GRID_N = -1.0, 1.5, 512


class Stability(str, Enum):
    STABLE_NODE = "stable-node"
    STABLE_FOCUS = "stable-focus"
    SADDLE = "saddle"
    UNSTABLE_NODE = "unstable-node"
    UNSTABLE_FOCUS = "unstable-focus"
    MARGINAL = "marginal"

    @property
    def is_stable(self) -> bool:
        return self in (Stability.STABLE_NODE, Stability.STABLE_FOCUS)


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Equilibrium:
    x: float
    y: float
    eigenvalues: tuple[complex, complex]
    stability: Stability
    trace: float
    det: float

    @property
    def state(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def stable(self) -> bool:
        return self.stability.is_stable

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "trace": self.trace,
            "det": self.det,
            "eigenvalues": [[ev.real, ev.imag] for ev in self.eigenvalues],
            "stability": self.stability.value,
        }


def x_nullcline(x, p: OriginalParams):
    """``y`` on the curve ``x' = 0``: ``x^2 (1 - x) + I``."""
    x = np.asarray(x, dtype=float)
    return x * x * (1.0 - x) + p.I


def y_nullcline(x, p: OriginalParams):
    """``y`` on the curve ``y' = 0``: ``(A / gamma) exp(alpha x)``."""
    if not p.gamma > 0:
        raise ValueError(f"gamma must be > 0, got {p.gamma!r}")
    x = np.asarray(x, dtype=float)
    return p.A / p.gamma * np.exp(p.alpha * x)


def _h(x: float, p: OriginalParams) -> float:
    # difference of the two nullclines; zero exactly at equilibria
    return x * x * (1.0 - x) + p.I - p.A / p.gamma * math.exp(p.alpha * x)


def _dh(x: float, p: OriginalParams) -> float:
    return 2.0 * x - 3.0 * x * x - p.A * p.alpha / p.gamma * math.exp(p.alpha * x)


def equilibrium_residual(x: float, y: float, p: OriginalParams) -> float:
    return float(np.max(np.abs(rhs_original((x, y), p))))


def _refine(a: float, b: float, ha: float, p: OriginalParams) -> float | None:
    """Bisection down to width 1e-6, then Newton polishing inside the bracket."""
    while b - a > 1e-6:
        m = 0.5 * (a + b)
        hm = _h(m, p)
        if hm == 0.0:
            return m
        if (hm > 0) == (ha > 0):
            a, ha = m, hm
        else:
            b = m
    x = 0.5 * (a + b)
    for _ in range(50):
        hx = _h(x, p)
        if abs(hx) < 1e-12:
            return x
        d = _dh(x, p)
        if d == 0.0:
            return None
        x_next = x - hx / d
        if not a - 1e-6 <= x_next <= b + 1e-6:
            return None
        if x_next == x:
            return x
        x = x_next
    return x if abs(_h(x, p)) < 1e-12 else None


def find_equilibria(
    p: OriginalParams, x_lo: float = X_LO, x_hi: float = X_HI, grid_n: int = GRID_N
) -> list[Equilibrium]:
    """All equilibria with ``x`` in ``[x_lo, x_hi]``, sorted by ``x``.

    Equilibria are the roots of the nullcline difference
    ``h(x) = x^2 (1 - x) + I - (A / gamma) exp(alpha x)``. Each sign change of
    ``h`` on a uniform grid of ``grid_n`` cells is refined separately.
    Cells where the polishing step fails are reported with a
    :class:`ConvergenceWarning` rather than silently dropped.
    """
    if not x_lo < x_hi:
        raise ValueError(f"need x_lo < x_hi, got {x_lo!r}, {x_hi!r}")
    if grid_n < 64:
        raise ValueError(f"grid_n must be >= 64, got {grid_n!r}")
    grid = np.linspace(x_lo, x_hi, grid_n + 1)
    hv = [_h(float(g), p) for g in grid]
    roots = []
    failed = []
    for i in range(grid_n):
        a, b, ha, hb = float(grid[i]), float(grid[i + 1]), hv[i], hv[i + 1]
        if ha == 0.0:
            roots.append(a)
            continue
        if i == grid_n - 1 and hb == 0.0:
            roots.append(b)
            continue
        if (ha > 0) != (hb > 0) and hb != 0.0:
            x = _refine(a, b, ha, p)
            if x is None:
                failed.append((a, b))
            else:
                roots.append(x)
    if failed:
        cells = ", ".join(f"[{a:.6g}, {b:.6g}]" for a, b in failed)
        warnings.warn(f"root refinement did not converge in cell(s) {cells}", ConvergenceWarning, stacklevel=2)
    return [classify_equilibrium((x, p.A / p.gamma * math.exp(p.alpha * x)), p) for x in roots]


def classify_equilibrium(e, p: OriginalParams) -> Equilibrium:
    """Linear stability of the equilibrium ``e = (x, y)``.

    Saddle iff ``det < 0``; otherwise stable iff ``trace < 0`` and a focus iff
    ``trace^2 < 4 det``. Points with ``|trace|`` or ``|det|`` below 1e-10 are
    labelled ``marginal``: they are bifurcation candidates, not a verdict.
    """
    x, y = float(e[0]), float(e[1])
    res = equilibrium_residual(x, y, p)
    if res > 1e-8:
        raise ValueError(f"({x!r}, {y!r}) is not an equilibrium (residual {res:.3e})")
    J = jacobian_original((x, y), p)
    tr = float(J[0, 0] + J[1, 1])
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    disc = tr * tr - 4.0 * det
    if disc >= 0:
        s = math.sqrt(disc)
        # roots of l^2 - tr l + det; avoid cancellation in the smaller one
        big = 0.5 * (tr + math.copysign(s, tr))
        small = det / big if big != 0 else 0.0
        ev = tuple(sorted((complex(big), complex(small)), key=lambda z: z.real))
    else:
        wi = 0.5 * math.sqrt(-disc)
        ev = (complex(0.5 * tr, -wi), complex(0.5 * tr, wi))
    stability = _stability(tr, det, disc)
    return Equilibrium(x, y, ev, stability, tr, det)


def _stability(tr: float, det: float, disc: float) -> Stability:
    if abs(tr) < MARGINAL_TOL or abs(det) < MARGINAL_TOL:
        return Stability.MARGINAL
    if det < 0:
        return Stability.SADDLE
    focus = disc < 0
    if tr < 0:
        return Stability.STABLE_FOCUS if focus else Stability.STABLE_NODE
    return Stability.UNSTABLE_FOCUS if focus else Stability.UNSTABLE_NODE
