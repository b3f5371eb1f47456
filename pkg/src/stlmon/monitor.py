"""Robustness evaluation over traces, offline and online.

Offline evaluation walks the formula tree recursively at an anchor
step; And/Or nodes aggregate with the configured semantics, temporal
windows reduce either with the same aggregators (``semantic`` mode) or
with exact min/max (``pointwise`` mode).

The online monitor keeps the last ``horizon+1`` samples in a ring
buffer and, once full, reports the offline robustness anchored at the
oldest buffered sample.  The stream value at step t therefore equals
the offline value at t - horizon, computed by the same code path.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from .formula import (
    Always, And, Comparison, Eventually, Formula, Implies, Membership, Not,
    Or, Pred, Predicate, SignalDomain, TrueFormula, Until, horizon,
    signals_of,
)
from .semantics import SemanticsConfig, conj, disj

__all__ = [
    "Trace", "Sample", "TraceError", "WarmUp", "Value", "StepResult",
    "OnlineMonitor", "load_trace_csv", "signed_distance",
    "robustness_offline", "monitor_new", "monitor_step", "monitor_reset",
    "verdict",
]


class TraceError(ValueError):
    """Raised for malformed traces, samples, and evaluation ranges."""


@dataclass(frozen=True)
class Trace:
    """Finite multi-signal time series with unit step."""

    signals: Mapping[str, tuple[float, ...]]
    length: int = -1  # inferred from signals unless they are empty

    def __post_init__(self) -> None:
        sigs = {name: tuple(float(v) for v in values)
                for name, values in dict(self.signals).items()}
        object.__setattr__(self, "signals", sigs)
        lengths = {len(v) for v in sigs.values()}
        if len(lengths) > 1:
            raise TraceError(f"signals have unequal lengths {sorted(lengths)}")
        inferred = lengths.pop() if lengths else None
        if self.length == -1:
            if inferred is None:
                raise TraceError("trace with no signals needs explicit length")
            object.__setattr__(self, "length", inferred)
        elif inferred is not None and inferred != self.length:
            raise TraceError(
                f"length {self.length} does not match signals ({inferred})")
        if self.length < 1:
            raise TraceError("trace must contain at least one step")
        for name, values in sigs.items():
            for i, v in enumerate(values):
                if not math.isfinite(v):
                    raise TraceError(
                        f"non-finite value {v!r} in signal {name!r} at step {i}")


@dataclass(frozen=True)
class Sample:
    """Signal values for a single time step."""

    values: Mapping[str, float]

    def __post_init__(self) -> None:
        vals = {name: float(v) for name, v in dict(self.values).items()}
        object.__setattr__(self, "values", vals)
        for name, v in vals.items():
            if not math.isfinite(v):
                raise TraceError(f"non-finite value {v!r} for signal {name!r}")


@dataclass(frozen=True)
class WarmUp:
    """Window not yet full; no robustness value available."""


@dataclass(frozen=True)
class Value:
    """Robustness of the formula anchored at t - horizon."""

    rho: float


StepResult = WarmUp | Value

WARM_UP = WarmUp()


def load_trace_csv(path: str) -> Trace:
    """Load a trace CSV: header of signal names, one row per step.

    A leading `time` column is allowed; it is dropped after checking
    that its values strictly increase.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header:
            raise TraceError(f"{path}: missing header row")
        names = [h.strip() for h in header]
        has_time = names and names[0] == "time"
        data_names = names[1:] if has_time else names
        if not data_names:
            raise TraceError(f"{path}: no signal columns")
        if len(set(data_names)) != len(data_names):
            raise TraceError(f"{path}: duplicate signal names in header")
        columns: dict[str, list[float]] = {n: [] for n in data_names}
        last_time: float | None = None
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(names):
                raise TraceError(
                    f"{path}, line {lineno}: expected {len(names)} fields, "
                    f"got {len(row)}")
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise TraceError(
                    f"{path}, line {lineno}: non-numeric value") from None
            if has_time:
                t = values[0]
                if last_time is not None and not t > last_time:
                    raise TraceError(
                        f"{path}, line {lineno}: time column must be "
                        f"strictly increasing ({t} after {last_time})")
                last_time = t
                values = values[1:]
            for name, v in zip(data_names, values):
                columns[name].append(v)
        if not next(iter(columns.values())):
            raise TraceError(f"{path}: trace has no data rows")
    try:
        return Trace({n: tuple(vs) for n, vs in columns.items()})
    except TraceError as exc:
        raise TraceError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def signed_distance(x: float, p: Predicate,
                    domains: Mapping[str, SignalDomain] | None = None,
                    normalize: bool = False) -> float:
    """Signed distance of a value to the predicate's violation boundary.

    Positive inside the satisfying set, negative outside.  With
    ``normalize`` the distance is divided by the declared domain width
    of the predicate's signal, making it dimensionless.
    """
    if isinstance(p, Comparison):
        base = x - p.c if p.op in (">", ">=") else p.c - x
    elif isinstance(p, Membership):
        base = min(x - p.lo, p.hi - x)
    else:
        raise TypeError(f"not a predicate: {p!r}")
    if normalize:
        if domains is None or p.signal not in domains:
            raise TraceError(
                f"normalization requires a declared domain for signal "
                f"{p.signal!r}")
        base = base / domains[p.signal].width
    return base


def verdict(rho: float) -> str:
    """Boolean reading of a robustness value: sat, unsat, or marginal."""
    if rho > 0:
        return "sat"
    if rho < 0:
        return "unsat"
    return "marginal"


def robustness_offline(f: Formula, tr: Trace, t: int, cfg: SemanticsConfig,
                       domains: Mapping[str, SignalDomain] | None = None,
                       normalize: bool = False) -> float:
    """Robustness of the trace against the formula, anchored at step t.

    Requires the full evaluation window: t + horizon(f) <= length - 1.
    In ``pointwise`` mode temporal window reductions (including the
    pairing inside until) use exact min/max regardless of cfg.kind.
    """
    h = horizon(f)
    if t < 0:
        raise TraceError(f"anchor {t} is negative")
    if t + h > tr.length - 1:
        raise TraceError(
            f"trace too short: anchor {t} plus horizon {h} needs "
            f"{t + h + 1} samples, trace has {tr.length}")
    pointwise = cfg.temporal_agg == "pointwise"

    def signal_at(name: str, k: int) -> float:
        try:
            series = tr.signals[name]
        except KeyError:
            raise TraceError(f"signal {name!r} missing from trace") from None
        return series[k]

    def ev(node: Formula, k: int) -> float:
        if isinstance(node, TrueFormula):
            return math.inf
        if isinstance(node, Pred):
            x = signal_at(node.pred.signal, k)
            return signed_distance(x, node.pred, domains, normalize)
        if isinstance(node, Not):
            return -ev(node.child, k)
        if isinstance(node, And):
            return conj([ev(c, k) for c in node.children], cfg)
        if isinstance(node, Or):
            return disj([ev(c, k) for c in node.children], cfg)
        if isinstance(node, Implies):
            return disj([-ev(node.lhs, k), ev(node.rhs, k)], cfg)
        if isinstance(node, Eventually):
            window = [ev(node.child, k + i)
                      for i in range(node.interval.lo, node.interval.hi + 1)]
            return max(window) if pointwise else disj(window, cfg)
        if isinstance(node, Always):
            window = [ev(node.child, k + i)
                      for i in range(node.interval.lo, node.interval.hi + 1)]
            return min(window) if pointwise else conj(window, cfg)
        if isinstance(node, Until):
            lo, hi = node.interval.lo, node.interval.hi
            lhs_series = [ev(node.lhs, k + i) for i in range(hi + 1)]
            candidates = []
            for i in range(lo, hi + 1):
                rhs_value = ev(node.rhs, k + i)
                prefix = lhs_series[:i + 1]
                if pointwise:
                    candidates.append(min(rhs_value, min(prefix)))
                else:
                    held = conj(prefix, cfg)
                    candidates.append(conj([rhs_value, held], cfg))
            return max(candidates) if pointwise else disj(candidates, cfg)
        raise TypeError(f"not a formula: {node!r}")

    return ev(f, t)


# ---------------------------------------------------------------------------
# Online monitor
# ---------------------------------------------------------------------------

class OnlineMonitor:
    """Incremental monitor over a sliding window of horizon+1 samples.

    Single-owner mutable object: feed one logical stream per instance.
    """

    def __init__(self, formula: Formula, cfg: SemanticsConfig,
                 domains: Mapping[str, SignalDomain] | None = None,
                 normalize: bool = False) -> None:
        self.formula = formula
        self.cfg = cfg
        self.domains = dict(domains) if domains else None
        self.normalize = normalize
        self.horizon = horizon(formula)
        self._signals = sorted(signals_of(formula))
        self._window: deque[Sample] = deque(maxlen=self.horizon + 1)
        self.t = 0  # samples consumed

    def step(self, sample: Sample | Mapping[str, float]) -> StepResult:
        """Consume one sample; WarmUp until the window holds h+1 samples."""
        if not isinstance(sample, Sample):
            sample = Sample(sample)
        missing = [s for s in self._signals if s not in sample.values]
        if missing:
            raise TraceError(
                f"sample at step {self.t} is missing signals: "
                f"{', '.join(missing)}")
        self._window.append(sample)
        self.t += 1
        if len(self._window) < self.horizon + 1:
            return WARM_UP
        window_trace = Trace(
            {name: tuple(s.values[name] for s in self._window)
             for name in self._signals},
            length=len(self._window) if not self._signals else -1)
        rho = robustness_offline(self.formula, window_trace, 0, self.cfg,
                                 self.domains, self.normalize)
        return Value(rho)

    def reset(self) -> None:
        """Clear the window and step counter; config is kept."""
        self._window.clear()
        self.t = 0


def monitor_new(f: Formula, cfg: SemanticsConfig,
                domains: Mapping[str, SignalDomain] | None = None,
                normalize: bool = False) -> OnlineMonitor:
    """Create an empty online monitor with precomputed horizon."""
    return OnlineMonitor(f, cfg, domains, normalize)


def monitor_step(m: OnlineMonitor,
                 s: Sample | Mapping[str, float]) -> StepResult:
    """Feed one sample to the monitor."""
    return m.step(s)


def monitor_reset(m: OnlineMonitor) -> OnlineMonitor:
    """Return the monitor to its empty state, keeping the configuration."""
    m.reset()
    return m
