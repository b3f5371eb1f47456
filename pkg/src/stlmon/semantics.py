"""Aggregation semantics for quantitative robustness.

Three built-in ways to combine child robustness values at And/Or nodes:

* ``classical``: exact min / max.
* ``lse``: log-sum-exp soft min / max with sharpness ``eta``; under- /
  over-approximates by at most ``ln(n)/eta``.
* ``sss``: smooth aggregation built from the mean and a smoothed
  spread term ``delta_hat * erf(mu * delta_hat)``, where ``delta_hat``
  is a log-sum-exp estimate of ``max - min``.  Everywhere smooth,
  stays within ``[min - 2*ln(n)/(n*eta), max]``, and has strictly
  positive partial derivatives in every argument.

Additional conj/disj pairs can be registered by name at runtime for
semantics whose formulas are not built in.

All exponential sums are max-shifted: every exponent is <= 0, so no
intermediate overflows even for value spans in the thousands.

The +inf sentinel produced by the `true` literal never reaches the
smooth kernels: conj drops it (identity element), disj short-circuits
on it (absorbing element), and dually for -inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

_BUILTIN_KINDS = ("classical", "lse", "sss")
_TEMPORAL_AGGS = ("semantic", "pointwise")


class SemanticsError(ValueError):
    """Raised for invalid configurations and aggregation arguments."""


@dataclass(frozen=True)
class SemanticsConfig:
    kind: str = "classical"         # classical | lse | sss | registered name
    mu: float = 0.3                 # SSS spread smoothing, > 0
    eta: float = 300.0              # LSE/SSS sharpness, > 0
    beta: float = 1.0               # reserved for registered semantics
    nu: float = 3.0                 # reserved for registered semantics
    temporal_agg: str = "semantic"  # semantic | pointwise

    def __post_init__(self) -> None:
        if not self.kind:
            raise SemanticsError("semantics kind must be nonempty")
        if not self.mu > 0:
            raise SemanticsError(f"mu must be > 0, got {self.mu}")
        if not self.eta > 0:
            raise SemanticsError(f"eta must be > 0, got {self.eta}")
        if self.temporal_agg not in _TEMPORAL_AGGS:
            raise SemanticsError(
                f"temporal_agg must be one of {_TEMPORAL_AGGS}, "
                f"got {self.temporal_agg!r}")


AggregateFn = Callable[[Sequence[float], SemanticsConfig], float]

# name -> (conj, disj); slots for semantics families not implemented here
_REGISTRY: dict[str, tuple[AggregateFn, AggregateFn]] = {}


def register_semantics(name: str, conj_fn: AggregateFn,
                       disj_fn: AggregateFn) -> None:
    """Register a conj/disj pair under a new semantics kind name."""
    if not name:
        raise SemanticsError("semantics name must be nonempty")
    if name in _BUILTIN_KINDS:
        raise SemanticsError(f"cannot override built-in semantics {name!r}")
    _REGISTRY[name] = (conj_fn, disj_fn)


def registered_semantics() -> tuple[str, ...]:
    return _BUILTIN_KINDS + tuple(sorted(_REGISTRY))


# ---------------------------------------------------------------------------
# Numeric primitives
# ---------------------------------------------------------------------------

def neg(r: float) -> float:
    """Robustness of a negation."""
    return -r


def erf(x: float) -> float:
    """Gaussian error function; odd, range (-1, 1)."""
    return math.erf(x)


def smooth_abs(x: float, mu: float) -> float:
    """Smooth approximation of |x| as x*erf(mu*x); even, in [0, |x|]."""
    if not mu > 0:
        raise SemanticsError(f"mu must be > 0, got {mu}")
    return x * erf(mu * x)


def delta_max_smooth(rho: Sequence[float], eta: float) -> float:
    """Smooth estimate of the spread max(rho) - min(rho).

    Equals log(n + sum_{i != j} exp(eta*(rho_i - rho_j)))/eta, computed
    as the sum of a soft max and a soft min so that every exponent is
    <= 0.  Overestimates the true spread by at most 2*ln(n)/eta.
    """
    if not eta > 0:
        raise SemanticsError(f"eta must be > 0, got {eta}")
    if len(rho) < 2:
        raise SemanticsError(
            f"delta_max_smooth needs at least 2 values, got {len(rho)}")
    m = max(rho)
    mn = min(rho)
    s_hi = math.fsum(math.exp(eta * (r - m)) for r in rho)
    s_lo = math.fsum(math.exp(eta * (mn - r)) for r in rho)
    return (m - mn) + (math.log(s_hi) + math.log(s_lo)) / eta


# ---------------------------------------------------------------------------
# Aggregators
# ---------------------------------------------------------------------------

def _conj_sss(rho: Sequence[float], cfg: SemanticsConfig) -> float:
    d = delta_max_smooth(rho, cfg.eta)
    return (math.fsum(rho) - smooth_abs(d, cfg.mu)) / len(rho)


def _disj_sss(rho: Sequence[float], cfg: SemanticsConfig) -> float:
    d = delta_max_smooth(rho, cfg.eta)
    return (math.fsum(rho) + smooth_abs(d, cfg.mu)) / len(rho)


def _conj_lse(rho: Sequence[float], cfg: SemanticsConfig) -> float:
    mn = min(rho)
    s = math.fsum(math.exp(-cfg.eta * (r - mn)) for r in rho)
    return mn - math.log(s) / cfg.eta


def _disj_lse(rho: Sequence[float], cfg: SemanticsConfig) -> float:
    m = max(rho)
    s = math.fsum(math.exp(cfg.eta * (r - m)) for r in rho)
    return m + math.log(s) / cfg.eta


def _resolve(cfg: SemanticsConfig) -> tuple[AggregateFn, AggregateFn]:
    if cfg.kind == "classical":
        return (lambda rho, _: min(rho)), (lambda rho, _: max(rho))
    if cfg.kind == "lse":
        return _conj_lse, _disj_lse
    if cfg.kind == "sss":
        return _conj_sss, _disj_sss
    try:
        return _REGISTRY[cfg.kind]
    except KeyError:
        raise SemanticsError(f"unknown semantics kind {cfg.kind!r}") from None


def conj(rho: Sequence[float], cfg: SemanticsConfig) -> float:
    """Aggregate child robustness values of a conjunction.

    +inf entries (from `true`) are dropped; -inf is absorbing.  A
    single remaining value is returned unchanged for every kind.
    """
    if len(rho) == 0:
        raise SemanticsError("conj of an empty list")
    finite = [r for r in rho if not (math.isinf(r) and r > 0)]
    if not finite:
        return math.inf
    if any(math.isinf(r) for r in finite):
        return -math.inf
    if len(finite) == 1:
        return finite[0]
    return _resolve(cfg)[0](finite, cfg)


def disj(rho: Sequence[float], cfg: SemanticsConfig) -> float:
    """Aggregate child robustness values of a disjunction.

    Dual of conj: -inf entries are dropped, +inf is absorbing.
    """
    if len(rho) == 0:
        raise SemanticsError("disj of an empty list")
    finite = [r for r in rho if not (math.isinf(r) and r < 0)]
    if not finite:
        return -math.inf
    if any(math.isinf(r) for r in finite):
        return math.inf
    if len(finite) == 1:
        return finite[0]
    return _resolve(cfg)[1](finite, cfg)
