"""Spike extraction, burst grouping and firing-regime labels.

Thresholds are relative to the range of the membrane potential, so results
are invariant under ``x -> a x + b`` with ``a > 0`` as long as the scaled
range stays clear of the absolute rest and spiking gates.

A spike is a local maximum of ``x`` that reaches the upper threshold and
stands out from its surroundings by at least ``min_prominence`` of the
range. Local maxima that clear the prominence bar but stay below the upper
threshold are recorded as subthreshold oscillations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.signal import find_peaks

from .simulate import TimeSeries

__all__ = [
    "Regime",
    "SpikeTrain",
    "RegimeLabel",
    "detect_spikes",
    "interspike_intervals",
    "partition_bursts",
    "stroboscopic_period",
    "classify_activity",
]

UPPER_FRACTION = 0.6
LOWER_FRACTION = 0.4
MIN_PROMINENCE = 0.01
SPIKING_RANGE = 0.2
REST_RANGE = 0.05
BURST_FACTOR = 4.0
REGULAR_CV = 0.05
STROBE_TOL = 1e-3
MIN_PERIODS = 8


class Regime(str, Enum):
    REST = "rest"
    SUBTHRESHOLD = "subthreshold_oscillation"
    REGULAR_SPIKING = "regular_spiking"
    BURSTING = "bursting"
    MIXED_MODE = "mixed_mode"
    IRREGULAR = "irregular"


@dataclass(frozen=True)
class SpikeTrain:
    spike_times: np.ndarray
    spike_indices: np.ndarray
    upper: float
    lower: float
    x_min: float
    x_max: float
    subthreshold_times: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def range(self) -> float:
        return self.x_max - self.x_min

    def __len__(self):
        return len(self.spike_times)


@dataclass(frozen=True)
class RegimeLabel:
    kind: Regime
    n_per_burst: int | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n_per_burst": self.n_per_burst,
            "spike_count": self.details.get("spike_count", 0),
            "isi_stats": self.details.get("isi_stats"),
            "strobe_period": self.details.get("strobe_period"),
            "burst_sizes": self.details.get("burst_sizes", []),
            "subthreshold_count": self.details.get("subthreshold_count", 0),
            "x_range": self.details.get("x_range"),
        }


def detect_spikes(
    ts: TimeSeries,
    upper_fraction: float = UPPER_FRACTION,
    min_prominence: float = MIN_PROMINENCE,
    min_range: float = SPIKING_RANGE,
) -> SpikeTrain:
    """Locate spikes in the first state component of ``ts``.

    Returns an empty train (with the range recorded) when the series never
    makes an excursion of at least ``min_range``.
    """
    if len(ts) < 10:
        raise ValueError(f"series too short for spike detection ({len(ts)} samples, need 10)")
    x = ts.x
    lo, hi = float(x.min()), float(x.max())
    r = hi - lo
    upper = lo + upper_fraction * r
    lower = lo + LOWER_FRACTION * r
    empty = np.empty(0)
    if r < min_range:
        return SpikeTrain(empty, np.empty(0, dtype=int), upper, lower, lo, hi, empty)
    peaks, props = find_peaks(x, prominence=min_prominence * r)
    is_spike = x[peaks] >= upper
    spikes = peaks[is_spike]
    sub = peaks[~is_spike]
    return SpikeTrain(ts.t[spikes], spikes, upper, lower, lo, hi, ts.t[sub])


def interspike_intervals(st: SpikeTrain | np.ndarray) -> np.ndarray:
    times = np.asarray(st.spike_times if isinstance(st, SpikeTrain) else st, dtype=float)
    if len(times) < 2:
        raise ValueError("need at least two spikes for interspike intervals")
    return np.diff(times)


def partition_bursts(st: SpikeTrain | np.ndarray, factor: float = BURST_FACTOR) -> list[list[int]]:
    """Group spike indices into bursts.

    An interval longer than ``factor`` times the shortest interval of the
    train separates two bursts. A uniform train comes back as one group.
    """
    isi = interspike_intervals(st)
    cut = factor * isi.min()
    groups = [[0]]
    for i, gap in enumerate(isi, start=1):
        if gap > cut:
            groups.append([i])
        else:
            groups[-1].append(i)
    return groups


def stroboscopic_period(ts: TimeSeries, period: float, tol: float = STROBE_TOL) -> int | None:
    """Smallest number of forcing periods after which the sampled state repeats.

    The state is sampled once per ``period`` from the start of ``ts``
    (linear interpolation between samples); ``None`` if no repeat up to
    half the number of samples.
    """
    n = int(math.floor((ts.t[-1] - ts.t[0]) / period * (1 + 1e-12))) + 1
    times = ts.t[0] + period * np.arange(n)
    pts = np.column_stack([np.interp(times, ts.t, ts.states[:, j]) for j in range(ts.states.shape[1])])
    for p in range(1, n // 2 + 1):
        if np.max(np.abs(pts[p:] - pts[:-p])) < tol:
            return p
    return None


def _isi_stats(isi: np.ndarray) -> dict:
    mean = float(isi.mean())
    std = float(isi.std())
    return {
        "count": int(isi.size),
        "mean": mean,
        "std": std,
        "cv": std / mean if mean > 0 else math.inf,
        "min": float(isi.min()),
        "max": float(isi.max()),
    }


def classify_activity(ts: TimeSeries, forcing_period: float, **spike_options) -> RegimeLabel:
    """Label the firing pattern of a post-transient series.

    Decision order: no spikes gives ``rest`` or ``subthreshold_oscillation``
    by range; a single evenly spaced group gives ``regular_spiking``, or
    ``mixed_mode`` when subthreshold oscillations recur between the spikes;
    several groups of the same size ``n >= 2`` whose stroboscopic samples
    repeat give ``bursting`` with ``n_per_burst = n``; groups of varying size
    with recurring subthreshold oscillations give ``mixed_mode``; anything
    else is ``irregular``.
    """
    duration = float(ts.t[-1] - ts.t[0])
    if duration < MIN_PERIODS * forcing_period * (1 - 1e-9):
        raise ValueError(
            f"horizon too short: {duration:.6g} covers fewer than {MIN_PERIODS} forcing periods"
        )
    st = detect_spikes(ts, **spike_options)
    strobe = stroboscopic_period(ts, forcing_period)
    details = {
        "spike_count": len(st),
        "x_range": st.range,
        "thresholds": {"upper": st.upper, "lower": st.lower},
        "strobe_period": strobe,
        "subthreshold_count": len(st.subthreshold_times),
        "isi_stats": None,
        "burst_sizes": [],
    }
    if len(st) == 0:
        kind = Regime.REST if st.range < REST_RANGE else Regime.SUBTHRESHOLD
        return RegimeLabel(kind, None, details)

    n_sub = len(st.subthreshold_times)
    if len(st) == 1:
        return RegimeLabel(Regime.MIXED_MODE if n_sub >= 2 else Regime.IRREGULAR, None, details)

    isi = interspike_intervals(st)
    stats = _isi_stats(isi)
    bursts = partition_bursts(st)
    sizes = [len(b) for b in bursts]
    details.update(isi_stats=stats, burst_sizes=sizes)
    recurring_sub = n_sub >= max(2, len(bursts) // 2)

    if len(bursts) == 1:
        if stats["cv"] < REGULAR_CV:
            kind = Regime.MIXED_MODE if recurring_sub else Regime.REGULAR_SPIKING
        else:
            kind = Regime.MIXED_MODE if recurring_sub else Regime.IRREGULAR
        return RegimeLabel(kind, None, details)

    # the window edges may cut the first and last bursts
    core = sizes[1:-1] if len(sizes) >= 3 else sizes
    if len(set(core)) == 1 and core[0] >= 2 and strobe is not None:
        return RegimeLabel(Regime.BURSTING, core[0], details)
    if recurring_sub:
        return RegimeLabel(Regime.MIXED_MODE, None, details)
    return RegimeLabel(Regime.IRREGULAR, None, details)
