"""Episode-level controller evaluation metrics.

Given a completed episode split into state and control signals, four
numbers summarize the run: mean squared control effort (cc), final
value of a designated distance signal (dc), mean classical robustness
of the task formula over all valid anchors (mos), and a strict-safety
indicator from the minimum robustness of a safety formula (sat).

mos and sat always use classical semantics; anchors range over
[0, T-1-horizon], the steps where the formula's full window exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .formula import Formula, horizon
from .monitor import Trace, TraceError, robustness_offline
from .semantics import SemanticsConfig

__all__ = [
    "EpisodeTrace", "MetricsReport", "control_cost", "distance_covered",
    "margin_of_satisfaction", "safety_sat", "make_report",
]

_CLASSICAL = SemanticsConfig(kind="classical")


@dataclass(frozen=True)
class EpisodeTrace:
    """One episode: state signals, control signals, and the distance signal."""

    states: Trace
    controls: Trace
    distance_signal: str

    def __post_init__(self) -> None:
        if self.states.length != self.controls.length:
            raise TraceError(
                f"states ({self.states.length}) and controls "
                f"({self.controls.length}) differ in length")
        if self.distance_signal not in self.states.signals:
            raise TraceError(
                f"distance signal {self.distance_signal!r} not among state "
                f"signals")
        overlap = set(self.states.signals) & set(self.controls.signals)
        if overlap:
            raise TraceError(
                f"signals appear as both state and control: "
                f"{', '.join(sorted(overlap))}")

    def merged(self) -> Trace:
        """All signals in one trace, for formulas mixing states and controls."""
        return Trace({**self.states.signals, **self.controls.signals})


@dataclass(frozen=True)
class MetricsReport:
    cc: float         # mean squared control effort, >= 0
    dc: float         # final distance-signal value
    mos: float        # mean classical robustness over valid anchors
    sat: int | None   # 1 strictly safe, 0 violated, None not evaluated

    def __post_init__(self) -> None:
        if self.sat not in (0, 1, None):
            raise ValueError(f"sat must be 0, 1, or None, got {self.sat!r}")


def control_cost(ep: EpisodeTrace) -> float:
    """Mean over steps of the per-step mean squared control magnitude.

    Equals sum of all squared control values divided by T*q.
    """
    q = len(ep.controls.signals)
    if q == 0:
        raise TraceError("episode has no control signals")
    total = math.fsum(v * v for series in ep.controls.signals.values()
                      for v in series)
    return total / (ep.controls.length * q)


def distance_covered(ep: EpisodeTrace) -> float:
    """Final value of the designated distance signal."""
    return ep.states.signals[ep.distance_signal][-1]


def _anchors(f: Formula, ep: EpisodeTrace) -> range:
    h = horizon(f)
    last = ep.states.length - 1 - h
    if last < 0:
        raise TraceError(
            f"trace of length {ep.states.length} is shorter than "
            f"horizon + 1 ({h + 1})")
    return range(last + 1)


def margin_of_satisfaction(f: Formula, ep: EpisodeTrace) -> float:
    """Mean classical robustness of the formula over all valid anchors."""
    tr = ep.merged()
    values = [robustness_offline(f, tr, t, _CLASSICAL) for t in _anchors(f, ep)]
    return math.fsum(values) / len(values)


def safety_sat(f_s: Formula, ep: EpisodeTrace) -> int:
    """1 iff classical robustness of the safety formula is strictly
    positive at every valid anchor, else 0 (zero counts as violated)."""
    tr = ep.merged()
    worst = min(robustness_offline(f_s, tr, t, _CLASSICAL)
                for t in _anchors(f_s, ep))
    return 1 if worst > 0 else 0


def make_report(ep: EpisodeTrace, f: Formula,
                f_safety: Formula | None = None) -> MetricsReport:
    """Assemble the full report; sat is None when no safety formula given."""
    sat = safety_sat(f_safety, ep) if f_safety is not None else None
    return MetricsReport(
        cc=control_cost(ep),
        dc=distance_covered(ep),
        mos=margin_of_satisfaction(f, ep),
        sat=sat,
    )
