"""Command-line front-end and streaming robustness service.

Subcommands: parse, eval, monitor, metrics, compare, and serve.  The
serve loop reads one JSON request per line on stdin and writes one
JSON response per line on stdout, so an external process (for example
an RL training loop) can consume online robustness as a reward stream.

Exit codes: 0 success, 1 usage or formula parse error, 2 data error
(unreadable trace, short trace, missing signal, missing domain).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

from .formula import (
    Formula, FormulaError, SignalDomain, horizon, load_domains_csv,
    parse_formula, print_formula,
)
from .metrics import EpisodeTrace, MetricsReport, make_report
from .monitor import (
    OnlineMonitor, Trace, TraceError, Value, load_trace_csv,
    robustness_offline,
)
from .semantics import SemanticsConfig, SemanticsError, registered_semantics

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


@dataclass(frozen=True)
class RunConfig:
    """Validated per-invocation settings shared by the batch commands."""

    formula: Formula
    cfg: SemanticsConfig
    domains: dict[str, SignalDomain] | None
    normalize: bool
    trace_file: str | None
    output: str  # csv | table


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this tool reserves 2 for
    # data errors, so remap to 1
    def error(self, message: str) -> None:  # type: ignore[override]
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt_float(x: float) -> str:
    """Shortest decimal that round-trips to the same float; integral
    values print without the trailing .0."""
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="stlmon", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    formula_opts = _ArgumentParser(add_help=False)
    group = formula_opts.add_mutually_exclusive_group(required=True)
    group.add_argument("--formula", "-f", help="formula text")
    group.add_argument("--spec-file", help="file containing the formula")

    sem_opts = _ArgumentParser(add_help=False)
    sem_opts.add_argument("--semantics", default="classical",
                          help="aggregation semantics (default classical)")
    sem_opts.add_argument("--mu", type=float, default=0.3,
                          help="spread smoothing for sss (default 0.3)")
    sem_opts.add_argument("--eta", type=float, default=300.0,
                          help="sharpness for lse/sss (default 300)")
    sem_opts.add_argument("--temporal-agg", choices=("semantic", "pointwise"),
                          default="semantic",
                          help="temporal window reduction mode")

    trace_opts = _ArgumentParser(add_help=False)
    trace_opts.add_argument("--trace", required=True, help="trace CSV file")

    norm_opts = _ArgumentParser(add_help=False)
    norm_opts.add_argument("--normalize", action="store_true",
                           help="divide predicate distances by domain width")
    norm_opts.add_argument("--domains", help="signal domains CSV file")

    out_opts = _ArgumentParser(add_help=False)
    out_opts.add_argument("--output", choices=("csv", "table"), default="csv",
                          help="report format (default csv)")

    p = sub.add_parser("parse", parents=[formula_opts],
                       help="parse a formula, print canonical form and horizon")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval",
                       parents=[formula_opts, sem_opts, trace_opts, norm_opts],
                       help="offline robustness at an anchor step")
    anchor = p.add_mutually_exclusive_group()
    anchor.add_argument("--t", type=int, default=None, help="anchor step")
    anchor.add_argument("--all", action="store_true",
                        help="evaluate at every valid anchor")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("monitor",
                       parents=[formula_opts, sem_opts, trace_opts, norm_opts],
                       help="stream t,rho lines over a trace")
    p.set_defaults(func=cmd_monitor)

    # metrics are defined over classical semantics, so no semantics flags
    p = sub.add_parser("metrics",
                       parents=[formula_opts, trace_opts, out_opts],
                       help="episode metrics: cc, dc, mos, sat")
    p.add_argument("--safety", help="safety formula for the sat indicator")
    p.add_argument("--distance-signal", required=True,
                   help="state signal whose final value is dc")
    p.add_argument("--controls", required=True,
                   help="comma-separated control signal names")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare",
                       parents=[formula_opts, trace_opts, norm_opts, out_opts],
                       help="evaluate the same trace under several semantics")
    p.add_argument("--semantics", default="classical,lse,sss",
                   help="comma-separated semantics kinds")
    p.add_argument("--mu", type=float, default=0.3)
    p.add_argument("--eta", type=float, default=300.0)
    p.add_argument("--temporal-agg", choices=("semantic", "pointwise"),
                   default="semantic")
    p.add_argument("--safety", help="safety formula for the sat column")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve",
                       help="line-delimited JSON request/response loop")
    p.set_defaults(func=lambda args: cmd_serve())

    return parser


def _formula_text(args: argparse.Namespace) -> str:
    if args.formula is not None:
        return args.formula
    with open(args.spec_file) as handle:
        return handle.read()


def _semantics_config(kind: str, args: argparse.Namespace) -> SemanticsConfig:
    if kind not in registered_semantics():
        raise SemanticsError(
            f"unknown semantics {kind!r}; available: "
            f"{', '.join(registered_semantics())}")
    return SemanticsConfig(kind=kind, mu=args.mu, eta=args.eta,
                           temporal_agg=args.temporal_agg)


def _run_config(args: argparse.Namespace, kind: str | None = None) -> RunConfig:
    f = parse_formula(_formula_text(args))
    cfg = _semantics_config(kind or args.semantics, args)
    domains = load_domains_csv(args.domains) if args.domains else None
    if args.normalize and domains is None:
        raise FormulaError("--normalize requires --domains")
    return RunConfig(formula=f, cfg=cfg, domains=domains,
                     normalize=args.normalize, trace_file=args.trace,
                     output=getattr(args, "output", "csv"))


# ---------------------------------------------------------------------------
# Batch commands
# ---------------------------------------------------------------------------

def cmd_parse(args: argparse.Namespace) -> int:
    f = parse_formula(_formula_text(args))
    print(print_formula(f))
    print(f"horizon {horizon(f)}")
    return EXIT_OK


def _valid_anchors(f: Formula, tr: Trace) -> range:
    last = tr.length - 1 - horizon(f)
    if last < 0:
        raise TraceError(
            f"trace of length {tr.length} is shorter than horizon + 1 "
            f"({horizon(f) + 1})")
    return range(last + 1)


def cmd_eval(args: argparse.Namespace) -> int:
    rc = _run_config(args)
    tr = load_trace_csv(rc.trace_file)
    if args.all:
        anchors: Sequence[int] = _valid_anchors(rc.formula, tr)
    else:
        anchors = [args.t if args.t is not None else 0]
    for t in anchors:
        rho = robustness_offline(rc.formula, tr, t, rc.cfg, rc.domains,
                                 rc.normalize)
        print(fmt_float(rho))
    return EXIT_OK


def _trace_rows(tr: Trace) -> list[dict[str, float]]:
    names = list(tr.signals)
    return [{n: tr.signals[n][i] for n in names} for i in range(tr.length)]


def cmd_monitor(args: argparse.Namespace) -> int:
    rc = _run_config(args)
    tr = load_trace_csv(rc.trace_file)
    mon = OnlineMonitor(rc.formula, rc.cfg, rc.domains, rc.normalize)
    for i, row in enumerate(_trace_rows(tr)):
        result = mon.step(row)
        rho = fmt_float(result.rho) if isinstance(result, Value) else ""
        print(f"{i},{rho}")
    if tr.length < mon.horizon + 1:
        print(f"warning: trace length {tr.length} is below horizon+1 "
              f"({mon.horizon + 1}); monitor never left warm-up",
              file=sys.stderr)
    return EXIT_OK


def _split_episode(tr: Trace, control_names: list[str],
                   distance_signal: str) -> EpisodeTrace:
    missing = [n for n in control_names if n not in tr.signals]
    if missing:
        raise TraceError(
            f"control signals not in trace: {', '.join(missing)}")
    states = {n: v for n, v in tr.signals.items() if n not in control_names}
    controls = {n: tr.signals[n] for n in control_names}
    if not states:
        raise TraceError("no state signals left after removing controls")
    return EpisodeTrace(states=Trace(states),
                        controls=Trace(controls, length=tr.length),
                        distance_signal=distance_signal)


def _sat_text(sat: int | None) -> str:
    return "-" if sat is None else str(sat)


def _print_metrics(report: MetricsReport, output: str) -> None:
    cells = [("cc", fmt_float(report.cc)), ("dc", fmt_float(report.dc)),
             ("mos", fmt_float(report.mos)), ("sat", _sat_text(report.sat))]
    if output == "csv":
        print(",".join(name for name, _ in cells))
        print(",".join(value for _, value in cells))
    else:
        for name, value in cells:
            print(f"{name:<4} {value}")


def cmd_metrics(args: argparse.Namespace) -> int:
    f = parse_formula(_formula_text(args))
    controls = [c.strip() for c in args.controls.split(",") if c.strip()]
    if not controls:
        raise FormulaError("--controls must name at least one signal")
    tr = load_trace_csv(args.trace)
    ep = _split_episode(tr, controls, args.distance_signal)
    f_safety = parse_formula(args.safety) if args.safety else None
    report = make_report(ep, f, f_safety)
    _print_metrics(report, args.output)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    kinds = [k.strip() for k in args.semantics.split(",") if k.strip()]
    if not kinds:
        raise FormulaError("--semantics must name at least one kind")
    f = parse_formula(_formula_text(args))
    f_safety = parse_formula(args.safety) if args.safety else None
    domains = load_domains_csv(args.domains) if args.domains else None
    if args.normalize and domains is None:
        raise FormulaError("--normalize requires --domains")
    tr = load_trace_csv(args.trace)
    anchors = _valid_anchors(f, tr)
    rows = []
    for kind in kinds:
        cfg = _semantics_config(kind, args)
        values = [robustness_offline(f, tr, t, cfg, domains, args.normalize)
                  for t in anchors]
        mos = math.fsum(values) / len(values)
        sat: int | None = None
        if f_safety is not None:
            worst = min(
                robustness_offline(f_safety, tr, t, cfg, domains,
                                   args.normalize)
                for t in _valid_anchors(f_safety, tr))
            sat = 1 if worst > 0 else 0
        rows.append((kind, fmt_float(values[0]), fmt_float(mos),
                     _sat_text(sat)))
    header = ("semantics", "rho", "mos", "sat")
    if args.output == "csv":
        print(",".join(header))
        for row in rows:
            print(",".join(row))
    else:
        widths = [max(len(header[i]), *(len(r[i]) for r in rows))
                  for i in range(4)]
        print("  ".join(header[i].ljust(widths[i]) for i in range(4)))
        for row in rows:
            print("  ".join(row[i].ljust(widths[i]) for i in range(4)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Serve protocol
# ---------------------------------------------------------------------------

_REQUEST_KEYS = frozenset(("cmd", "formula", "semantics", "params", "values"))
_PARAM_KEYS = frozenset(("mu", "eta", "beta", "nu", "temporal_agg",
                         "normalize", "domains"))


@dataclass(frozen=True)
class Request:
    cmd: str
    formula: str | None = None
    semantics: str | None = None
    params: Mapping[str, object] | None = None
    values: Mapping[str, float] | None = None


def parse_request(line: str) -> Request:
    """Decode and validate one protocol request line."""
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormulaError(f"malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise FormulaError("request must be a JSON object")
    unknown = set(raw) - _REQUEST_KEYS
    if unknown:
        raise FormulaError(
            f"unknown request keys: {', '.join(sorted(unknown))}")
    cmd = raw.get("cmd")
    if cmd not in ("init", "step", "reset", "quit"):
        raise FormulaError(f"unknown cmd {cmd!r}")
    params = raw.get("params")
    if params is not None and not isinstance(params, dict):
        raise FormulaError("params must be an object")
    values = raw.get("values")
    if values is not None and not isinstance(values, dict):
        raise FormulaError("values must be an object")
    return Request(cmd=cmd, formula=raw.get("formula"),
                   semantics=raw.get("semantics"), params=params,
                   values=values)


def _monitor_from_init(req: Request) -> OnlineMonitor:
    if not isinstance(req.formula, str) or not req.formula:
        raise FormulaError("init requires a formula string")
    f = parse_formula(req.formula)
    params = dict(req.params or {})
    unknown = set(params) - _PARAM_KEYS
    if unknown:
        raise FormulaError(
            f"unknown params: {', '.join(sorted(unknown))}")
    kind = req.semantics if req.semantics is not None else "classical"
    if kind not in registered_semantics():
        raise SemanticsError(f"unknown semantics {kind!r}")
    domains = None
    raw_domains = params.pop("domains", None)
    if raw_domains is not None:
        if not isinstance(raw_domains, dict):
            raise FormulaError("domains must map signal to [lo, hi]")
        domains = {}
        for name, bounds in raw_domains.items():
            if (not isinstance(bounds, (list, tuple)) or len(bounds) != 2):
                raise FormulaError(
                    f"domain for {name!r} must be a [lo, hi] pair")
            domains[name] = SignalDomain(name, float(bounds[0]),
                                         float(bounds[1]))
    normalize = bool(params.pop("normalize", False))
    if normalize and domains is None:
        raise FormulaError("normalize requires domains")
    cfg = SemanticsConfig(
        kind=kind,
        mu=float(params.pop("mu", 0.3)),
        eta=float(params.pop("eta", 300.0)),
        beta=float(params.pop("beta", 1.0)),
        nu=float(params.pop("nu", 3.0)),
        temporal_agg=str(params.pop("temporal_agg", "semantic")),
    )
    return OnlineMonitor(f, cfg, domains, normalize)


def cmd_serve(stdin: IO[str] | None = None,
              stdout: IO[str] | None = None) -> int:
    """Run the request/response loop until quit or end of input."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    def send(obj: dict) -> None:
        stdout.write(json.dumps(obj) + "\n")
        stdout.flush()

    monitor: OnlineMonitor | None = None
    for line in stdin:
        if not line.strip():
            continue
        try:
            req = parse_request(line)
            if req.cmd == "quit":
                send({"ok": True})
                return EXIT_OK
            if req.cmd == "init":
                monitor = _monitor_from_init(req)
                send({"ok": True, "horizon": monitor.horizon})
            elif req.cmd == "step":
                if monitor is None:
                    raise TraceError("step before init")
                if req.values is None:
                    raise TraceError("step requires values")
                result = monitor.step(req.values)
                rho = result.rho if isinstance(result, Value) else None
                send({"ok": True, "rho": rho})
            else:  # reset
                if monitor is None:
                    raise TraceError("reset before init")
                monitor.reset()
                send({"ok": True})
        except (FormulaError, SemanticsError, TraceError, ValueError,
                TypeError) as exc:
            send({"ok": False, "error": str(exc)})
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FormulaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SemanticsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
