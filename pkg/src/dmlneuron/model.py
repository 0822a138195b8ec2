"""Vector fields of the denatured Morris-Lecar neuron and its flux-coupled variant.

Two models are provided:

* the planar model ``x' = x^2 (1 - x) - y + I``, ``y' = A exp(alpha x) - gamma y``;
* the improved model, which adds a periodic current ``I0 sin(omega t)``, a
  memductance feedback ``k rho(phi) x`` and a third equation for the
  magnetic flux ``phi' = k1 x - k2 phi + phi_ext``.

All quantities are dimensionless. Evaluation order inside every right-hand
side is fixed (cubic term, minus recovery, plus forcing, plus feedback) so
repeated runs produce bit-identical numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Callable

import numpy as np

__all__ = [
    "OriginalParams",
    "ImprovedParams",
    "Partials",
    "rhs_original",
    "rho",
    "rhs_improved",
    "improved_field",
    "original_field",
    "jacobian_original",
    "higher_partials",
    "params_from_json",
]

A_DEFAULT = 0.0041
ALPHA_DEFAULT = 5.276


def _require_positive(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if value <= 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


class _ParamsMixin:
    """JSON round-tripping shared by both parameter sets."""

    def to_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown parameter key(s) for {cls.__name__}: {', '.join(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    @classmethod
    def from_json(cls, text: str):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("parameter JSON must be a flat object")
        return cls.from_dict(data)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class OriginalParams(_ParamsMixin):
    """Constants of the planar model.

    ``gamma`` defaults to 0.315, the value used for the forced-model scans;
    the planar diagrams leave it free.
    """

    A: float = A_DEFAULT
    alpha: float = ALPHA_DEFAULT
    gamma: float = 0.315
    I: float = 0.0

    def __post_init__(self):
        _require_positive("A", self.A)
        _require_positive("alpha", self.alpha)
        _require_positive("gamma", self.gamma)
        _require_finite("I", self.I)


@dataclass(frozen=True)
class ImprovedParams(_ParamsMixin):
    """Constants of the flux-coupled, periodically forced model."""

    A: float = A_DEFAULT
    alpha: float = ALPHA_DEFAULT
    gamma: float = 0.315
    I0: float = 0.0
    omega: float = 0.01
    k: float = 0.003
    k1: float = 0.19
    k2: float = 0.5
    alpha1: float = 0.1
    beta: float = 0.02
    phi_ext: float = 0.2

    def __post_init__(self):
        _require_positive("A", self.A)
        _require_positive("alpha", self.alpha)
        _require_positive("gamma", self.gamma)
        _require_positive("omega", self.omega)
        for name in ("I0", "k", "k1", "k2", "alpha1", "beta", "phi_ext"):
            _require_finite(name, getattr(self, name))

    @property
    def forcing_period(self) -> float:
        return 2.0 * math.pi / self.omega

    def reduced(self, I: float = 0.0) -> OriginalParams:
        """Planar parameter set sharing ``A``, ``alpha`` and ``gamma``."""
        return OriginalParams(A=self.A, alpha=self.alpha, gamma=self.gamma, I=I)


def params_from_json(text: str) -> OriginalParams | ImprovedParams:
    """Parse either parameter set, picking the class from the keys present."""
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError("parameter JSON must be a flat object")
    if "I" in data and "I0" in data:
        raise ValueError("parameter JSON mixes 'I' (planar model) and 'I0' (forced model)")
    planar = {f.name for f in fields(OriginalParams)}
    if set(data) <= planar:
        return OriginalParams.from_dict(data)
    return ImprovedParams.from_dict(data)


def _state(s, n: int) -> tuple[float, ...]:
    vals = tuple(float(v) for v in s)
    if len(vals) != n:
        raise ValueError(f"expected a state of length {n}, got {len(vals)}")
    for v in vals:
        if not math.isfinite(v):
            raise ValueError(f"non-finite state component: {vals!r}")
    return vals


def rhs_original(s, p: OriginalParams) -> np.ndarray:
    """Time derivative ``(x', y')`` of the planar model at state ``s = (x, y)``."""
    x, y = _state(s, 2)
    dx = x * x * (1.0 - x) - y + p.I
    dy = p.A * math.exp(p.alpha * x) - p.gamma * y
    return np.array([dx, dy])


def rho(phi: float, p: ImprovedParams) -> float:
    """Memductance ``alpha1 + 3 beta phi^2``."""
    return p.alpha1 + 3.0 * p.beta * phi * phi


def rhs_improved(s, t: float, p: ImprovedParams) -> np.ndarray:
    """Time derivative ``(x', y', phi')`` of the forced model at time ``t``.

    With ``k = 0`` and ``I0 = 0`` the first two components reproduce
    :func:`rhs_original` at ``I = 0`` exactly: the forcing and feedback
    terms are added as literal zeros after the shared expression.
    """
    x, y, phi = _state(s, 3)
    if not math.isfinite(t):
        raise ValueError(f"non-finite time: {t!r}")
    dx = x * x * (1.0 - x) - y + p.I0 * math.sin(p.omega * t) + p.k * rho(phi, p) * x
    dy = p.A * math.exp(p.alpha * x) - p.gamma * y
    dphi = p.k1 * x - p.k2 * phi + p.phi_ext
    return np.array([dx, dy, dphi])


def original_field(p: OriginalParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Unchecked ``f(t, s)`` closure for the integrator (planar model)."""
    A, alpha, gamma, I = p.A, p.alpha, p.gamma, p.I
    exp = math.exp

    def f(t, s):
        x = s[0]
        y = s[1]
        return np.array([x * x * (1.0 - x) - y + I, A * exp(alpha * x) - gamma * y])

    return f


def improved_field(p: ImprovedParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Unchecked ``f(t, s)`` closure for the integrator (forced model).

    Same arithmetic, in the same order, as :func:`rhs_improved`; the
    integrator does its own finiteness checks.
    """
    A, alpha, gamma = p.A, p.alpha, p.gamma
    I0, omega, k = p.I0, p.omega, p.k
    k1, k2, a1, b3, phi_ext = p.k1, p.k2, p.alpha1, 3.0 * p.beta, p.phi_ext
    exp, sin = math.exp, math.sin

    def f(t, s):
        x = s[0]
        y = s[1]
        phi = s[2]
        return np.array([
            x * x * (1.0 - x) - y + I0 * sin(omega * t) + k * (a1 + b3 * phi * phi) * x,
            A * exp(alpha * x) - gamma * y,
            k1 * x - k2 * phi + phi_ext,
        ])

    return f


def jacobian_original(s, p: OriginalParams) -> np.ndarray:
    """Analytic 2x2 Jacobian ``[[2x - 3x^2, -1], [A alpha e^{alpha x}, -gamma]]``."""
    x, _ = _state(s, 2)
    return np.array([
        [2.0 * x - 3.0 * x * x, -1.0],
        [p.A * p.alpha * math.exp(p.alpha * x), -p.gamma],
    ])


@dataclass(frozen=True)
class Partials:
    """Derivatives of ``(f, g)`` through third order at one state.

    ``jac[i, a]``, ``hess[i, a, b]`` and ``third[i, a, b, c]`` hold the
    derivative of component ``i`` (0 for ``f``, 1 for ``g``) with respect to
    state coordinates ``a, b, c`` (0 for ``x``, 1 for ``y``).
    """

    jac: np.ndarray
    hess: np.ndarray
    third: np.ndarray

    @property
    def f_xx(self) -> float:
        return float(self.hess[0, 0, 0])

    @property
    def f_xxx(self) -> float:
        return float(self.third[0, 0, 0, 0])

    @property
    def g_xx(self) -> float:
        return float(self.hess[1, 0, 0])

    @property
    def g_xxx(self) -> float:
        return float(self.third[1, 0, 0, 0])

    @property
    def g_yy(self) -> float:
        return float(self.hess[1, 1, 1])

    def bilinear(self, u, v) -> np.ndarray:
        """Second-order term ``B(u, v)`` of the Taylor expansion."""
        return np.einsum("iab,a,b->i", self.hess, u, v)

    def trilinear(self, u, v, w) -> np.ndarray:
        """Third-order term ``C(u, v, w)`` of the Taylor expansion."""
        return np.einsum("iabc,a,b,c->i", self.third, u, v, w)


def higher_partials(s, p: OriginalParams) -> Partials:
    x, _ = _state(s, 2)
    e = p.A * math.exp(p.alpha * x)
    jac = jacobian_original((x, 0.0), p)
    hess = np.zeros((2, 2, 2))
    third = np.zeros((2, 2, 2, 2))
    hess[0, 0, 0] = 2.0 - 6.0 * x
    hess[1, 0, 0] = e * p.alpha**2
    third[0, 0, 0, 0] = -6.0
    third[1, 0, 0, 0] = e * p.alpha**3
    return Partials(jac=jac, hess=hess, third=third)
