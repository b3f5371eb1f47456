"""Quantitative STL monitoring: classical and smooth robustness, offline
and online, plus episode metrics and a streaming reward protocol."""

from .formula import (
    Always, And, Comparison, Eventually, Formula, FormulaError, Implies,
    Interval, Membership, Not, Or, Pred, Predicate, SignalDomain, TRUE,
    TrueFormula, Until, horizon, load_domains_csv, parse_formula,
    print_formula, signals_of,
)
from .semantics import (
    SemanticsConfig, SemanticsError, conj, delta_max_smooth, disj, erf, neg,
    register_semantics, registered_semantics, smooth_abs,
)
from .monitor import (
    OnlineMonitor, Sample, StepResult, Trace, TraceError, Value, WarmUp,
    load_trace_csv, monitor_new, monitor_reset, monitor_step,
    robustness_offline, signed_distance, verdict,
)
from .metrics import (
    EpisodeTrace, MetricsReport, control_cost, distance_covered, make_report,
    margin_of_satisfaction, safety_sat,
)

__version__ = "0.1.0"

__all__ = [
    "Always", "And", "Comparison", "Eventually", "Formula", "FormulaError",
    "Implies", "Interval", "Membership", "Not", "Or", "Pred", "Predicate",
    "SignalDomain", "TRUE", "TrueFormula", "Until", "horizon",
    "load_domains_csv", "parse_formula", "print_formula", "signals_of",
    "SemanticsConfig", "SemanticsError", "conj", "delta_max_smooth", "disj",
    "erf", "neg", "register_semantics", "registered_semantics", "smooth_abs",
    "OnlineMonitor", "Sample", "StepResult", "Trace", "TraceError", "Value",
    "WarmUp", "load_trace_csv", "monitor_new", "monitor_reset",
    "monitor_step", "robustness_offline", "signed_distance", "verdict",
    "EpisodeTrace", "MetricsReport", "control_cost", "distance_covered",
    "make_report", "margin_of_satisfaction", "safety_sat",
    "__version__",
]
