"""Adaptive time integration and the named forcing scenarios.

The integrator is the Dormand-Prince 5(4) embedded pair with local
extrapolation, an elementary step-size controller, and Shampine's
fourth-order continuous extension for dense output. Output is sampled on
a uniform grid through the interpolant; the sample grid never influences
which steps are taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import ImprovedParams, improved_field

__all__ = [
    "IntegrationError",
    "TimeSeries",
    "Scenario",
    "SCENARIOS",
    "integrate_adaptive",
    "integrate_fixed",
    "run_scenario",
    "get_scenario",
]

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# difference between the 5th- and 4th-order weights, 7th stage is the FSAL one
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# continuous extension: y(t + th) = y + h * K^T (P @ [th, th^2, th^3, th^4])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
MIN_STEP = 1e-12


class IntegrationError(RuntimeError):
    """Raised when a step underflows or the state stops being finite."""

    def __init__(self, message: str, t: float, state: np.ndarray):
        super().__init__(f"{message} at t={t!r}, state={np.asarray(state).tolist()!r}")
        self.t = t
        self.state = np.asarray(state)


@dataclass
class TimeSeries:
    """Uniformly sampled trajectory.

    ``states[i]`` is the state at ``t[i]``. ``meta`` records parameters,
    initial condition, solver settings and step statistics.
    """

    t: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim == 1:
            self.states = self.states[:, None]
        if len(self.t) != len(self.states):
            raise ValueError("t and states have different lengths")
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("sample times must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("time series contains non-finite samples")

    def __len__(self):
        return len(self.t)

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def window(self, t_start: float, t_stop: float = math.inf) -> TimeSeries:
        keep = (self.t >= t_start - 1e-9 * max(1.0, abs(t_start))) & (self.t <= t_stop)
        return TimeSeries(self.t[keep], self.states[keep], dict(self.meta))

    def post_transient(self) -> TimeSeries:
        """Samples after ``meta['transient_end']`` (the whole series if unset)."""
        return self.window(self.meta.get("transient_end", float(self.t[0])))


def _rms(v: np.ndarray) -> float:
    return math.sqrt(float(np.dot(v, v)) / v.size)


def _initial_step(f, t0, y0, f0, direction, rtol, atol) -> float:
    # Hairer, Norsett & Wanner, Solving ODEs I, sec. II.4
    scale = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = f(t0 + direction * h0, y1)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _stages(f, t, y, f0, h):
    K = np.empty((7, y.size))
    K[0] = f0
    for i in range(1, 6):
        K[i] = f(t + _C[i] * h, y + h * (_A[i] @ K[:i]))
    y_new = y + h * (_B @ K[:6])
    K[6] = f(t + h, y_new)
    return K, y_new


def integrate_adaptive(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    s0,
    t_span: tuple[float, float],
    rtol: float = 1e-9,
    atol: float = 1e-12,
    sample_dt: float | None = None,
    first_step: float | None = None,
    max_steps: int = 50_000_000,
) -> TimeSeries:
    """Integrate ``s' = rhs(t, s)`` over ``t_span`` with error control.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, s)`` returning an array shaped like ``s``.
    s0 : array_like
        Initial state.
    t_span : (float, float)
        Start and end time, ``t1 > t0``.
    rtol, atol : float
        Relative and absolute tolerance of the mixed local error test.
        ``rtol`` must lie in ``[1e-12, 1e-3]``.
    sample_dt : float, optional
        Output spacing. Defaults to ``(t1 - t0) / 1000``. Samples come from
        the continuous extension.

    Returns
    -------
    TimeSeries
        Samples at ``t0, t0 + dt, ...`` up to ``t1``; ``meta`` carries the
        accepted/rejected step counts and the settings used.

    Raises
    ------
    IntegrationError
        If the step size falls below ``1e-12`` or the state becomes
        non-finite.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 <= t0:
        raise ValueError(f"t_span must be finite with t1 > t0, got {t_span!r}")
    if not 1e-12 <= rtol <= 1e-3:
        raise ValueError(f"rtol must lie in [1e-12, 1e-3], got {rtol!r}")
    if not atol > 0:
        raise ValueError(f"atol must be positive, got {atol!r}")
    if sample_dt is None:
        sample_dt = (t1 - t0) / 1000
    if not sample_dt > 0:
        raise ValueError(f"sample_dt must be positive, got {sample_dt!r}")

    y = np.array(s0, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise IntegrationError("non-finite initial state", t0, y)
    n_samples = int(math.floor((t1 - t0) / sample_dt * (1 + 1e-12))) + 1
    t_out = t0 + sample_dt * np.arange(n_samples)
    out = np.empty((n_samples, y.size))
    out[0] = y
    j = 1

    t = t0
    f0 = np.asarray(rhs(t, y), dtype=float)
    h = first_step if first_step is not None else _initial_step(rhs, t, y, f0, 1.0, rtol, atol)
    n_acc = n_rej = 0
    n_eval = 2
    err_exp = -1.0 / 5.0

    while t < t1:
        if n_acc + n_rej >= max_steps:
            raise IntegrationError("step budget exhausted", t, y)
        if h < MIN_STEP:
            raise IntegrationError(f"step size underflow (h={h:.3e})", t, y)
        last = t + h >= t1
        if last:
            h = t1 - t
        K, y_new = _stages(rhs, t, y, f0, h)
        n_eval += 6
        if not np.all(np.isfinite(y_new)):
            if h <= MIN_STEP:
                raise IntegrationError("non-finite state", t, y)
            h *= MIN_FACTOR
            n_rej += 1
            continue
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(h * (_E @ K) / scale)
        if err <= 1.0:
            t_new = t1 if last else t + h
            while j < n_samples and t_out[j] <= t_new:
                theta = (t_out[j] - t) / h
                out[j] = y + h * (_P @ np.array([theta, theta**2, theta**3, theta**4])) @ K
                j += 1
            t = t_new
            y = y_new
            f0 = K[6]
            n_acc += 1
            factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err**err_exp)
            h *= factor
        else:
            n_rej += 1
            h *= max(MIN_FACTOR, SAFETY * err**err_exp)

    if j < n_samples:
        out[j:] = y
    meta = {
        "method": "dopri5",
        "rtol": rtol,
        "atol": atol,
        "sample_dt": sample_dt,
        "t_span": [t0, t1],
        "initial_state": [float(v) for v in np.ravel(s0)],
        "accepted_steps": n_acc,
        "rejected_steps": n_rej,
        "rhs_evaluations": n_eval,
    }
    return TimeSeries(t_out, out, meta)


def integrate_fixed(rhs, s0, t_span, n_steps: int) -> np.ndarray:
    """Final state after ``n_steps`` equal Dormand-Prince steps (no error control)."""
    t0, t1 = map(float, t_span)
    h = (t1 - t0) / n_steps
    y = np.array(s0, dtype=float).ravel()
    t = t0
    f0 = np.asarray(rhs(t, y), dtype=float)
    for _ in range(n_steps):
        K, y = _stages(rhs, t, y, f0, h)
        f0 = K[6]
        t += h
    return y


@dataclass(frozen=True)
class Scenario:
    """A named forcing experiment on the improved model.

    ``expected`` is the firing pattern the scenario is meant to show;
    ``n_per_burst`` the expected spikes per burst where one is stated.
    """

    name: str
    params: ImprovedParams
    initial_state: tuple[float, float, float] = (0.01, 0.01, 0.01)
    n_periods: int = 20
    transient_fraction: float = 0.5
    expected: str = ""
    n_per_burst: int | None = None
    note: str = ""

    def __post_init__(self):
        if self.n_periods < 10:
            raise ValueError("a scenario must cover at least 10 forcing periods")
        if not 0 <= self.transient_fraction < 1:
            raise ValueError("transient_fraction must lie in [0, 1)")

    @property
    def period(self) -> float:
        return self.params.forcing_period

    @property
    def horizon(self) -> float:
        return self.n_periods * self.period

    @property
    def sample_dt(self) -> float:
        return self.period / 2000

    def describe(self) -> dict:
        return {
            "name": self.name,
            "params": self.params.to_dict(),
            "initial_state": list(self.initial_state),
            "n_periods": self.n_periods,
            "transient_fraction": self.transient_fraction,
            "expected": self.expected,
            "n_per_burst": self.n_per_burst,
            "note": self.note,
        }


def _fig4(name, I0, expected, n=None):
    return Scenario(name, ImprovedParams(gamma=0.315, I0=I0), expected=expected, n_per_burst=n)


SCENARIOS: dict[str, Scenario] = {
    s.name: s
    for s in [
        _fig4("fig4a", 0.00072, "rest"),
        _fig4("fig4c", 0.0155, "regular_spiking"),
        _fig4("fig4e", 0.016, "bursting", 2),
        _fig4("fig4g", 0.02, "bursting", 4),
        _fig4("fig4i", 0.04, "bursting", 13),
        Scenario(
            "fig5a",
            ImprovedParams(A=0.005, gamma=0.23, omega=0.03, I0=0.04),
            expected="mixed_mode",
            note="k not listed for this panel; default k=0.003 used",
        ),
        Scenario(
            "fig5b",
            ImprovedParams(A=0.005, gamma=0.035, omega=0.0121, k=0.0231, I0=0.187),
            expected="mixed_mode",
        ),
        Scenario(
            "fig5c",
            ImprovedParams(A=0.002, gamma=0.1576, omega=0.02, k=0.018, I0=0.17),
            expected="bursting",
            n_per_burst=7,
        ),
        Scenario(
            "fig5d",
            ImprovedParams(A=0.002, gamma=0.1576, omega=0.001, k=0.919, I0=0.17),
            expected="regular_spiking",
        ),
        Scenario(
            "fig5e",
            ImprovedParams(A=0.0187, gamma=0.231, omega=0.015, k=0.05, I0=0.434),
            expected="bursting",
        ),
        Scenario(
            "fig5f",
            ImprovedParams(A=0.0018, gamma=0.231, omega=0.015, k=0.08, I0=0.201),
            expected="bursting",
        ),
    ]
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None


def run_scenario(sc: Scenario | str, rtol: float = 1e-9, atol: float = 1e-12) -> TimeSeries:
    """Integrate a scenario over its horizon.

    The returned series covers the full horizon; ``post_transient()`` drops
    the first ``transient_fraction`` of it.
    """
    if isinstance(sc, str):
        sc = get_scenario(sc)
    ts = integrate_adaptive(
        improved_field(sc.params),
        sc.initial_state,
        (0.0, sc.horizon),
        rtol=rtol,
        atol=atol,
        sample_dt=sc.sample_dt,
    )
    ts.meta.update(
        scenario=sc.name,
        params=sc.params.to_dict(),
        forcing_period=sc.period,
        transient_end=sc.transient_fraction * sc.horizon,
    )
    return ts
