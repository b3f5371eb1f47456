"""Bounded STL formulas: AST types, parser, printer, horizon and signal analysis.

Formulas are immutable trees. Temporal operators carry integer step
intervals; unbounded operators are rejected so that every formula has a
finite horizon and can be monitored online over a sliding window.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass


class FormulaError(ValueError):
    """Raised for syntax errors and ill-formed formula constructions."""


# ---------------------------------------------------------------------------
# AST types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lo: int  # steps, >= 0
    hi: int  # steps, >= lo, finite

    def __post_init__(self) -> None:
        if not isinstance(self.lo, int) or not isinstance(self.hi, int):
            raise FormulaError("interval bounds must be integers")
        if self.lo < 0:
            raise FormulaError("interval lower bound must be >= 0")
        if self.hi < self.lo:
            raise FormulaError(
                f"empty interval [{self.lo}:{self.hi}] (upper bound below lower)")


@dataclass(frozen=True)
class Comparison:
    signal: str  # nonempty signal name
    op: str      # one of < <= > >=
    c: float     # threshold

    def __post_init__(self) -> None:
        if not self.signal:
            raise FormulaError("empty signal name")
        if self.op not in ("<", "<=", ">", ">="):
            raise FormulaError(f"unknown comparison operator {self.op!r}")
        object.__setattr__(self, "c", float(self.c))


@dataclass(frozen=True)
class Membership:
    signal: str  # nonempty signal name
    lo: float    # interval lower bound
    hi: float    # interval upper bound, > lo

    def __post_init__(self) -> None:
        if not self.signal:
            raise FormulaError("empty signal name")
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not self.lo < self.hi:
            raise FormulaError(
                f"empty membership interval [{self.lo}, {self.hi}]")


Predicate = Comparison | Membership


@dataclass(frozen=True)
class TrueFormula:
    pass


@dataclass(frozen=True)
class Pred:
    pred: Predicate


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    children: tuple["Formula", ...]  # >= 2, no direct And children

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise FormulaError("'and' needs at least two operands")
        if any(isinstance(c, And) for c in self.children):
            raise FormulaError("nested And must be flattened")


@dataclass(frozen=True)
class Or:
    children: tuple["Formula", ...]  # >= 2, no direct Or children

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise FormulaError("'or' needs at least two operands")
        if any(isinstance(c, Or) for c in self.children):
            raise FormulaError("nested Or must be flattened")


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Until:
    interval: Interval
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Eventually:
    interval: Interval
    child: "Formula"


@dataclass(frozen=True)
class Always:
    interval: Interval
    child: "Formula"


Formula = (TrueFormula | Pred | Not | And | Or | Implies | Until
           | Eventually | Always)

TRUE = TrueFormula()


@dataclass(frozen=True)
class SignalDomain:
    signal: str  # nonempty signal name
    lo: float    # declared lower bound
    hi: float    # declared upper bound, > lo

    def __post_init__(self) -> None:
        if not self.signal:
            raise FormulaError("empty signal name in domain")
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not self.lo < self.hi:
            raise FormulaError(
                f"empty domain [{self.lo}, {self.hi}] for {self.signal!r}")

    @property
    def width(self) -> float:
        return self.hi - self.lo


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_KEYWORDS = frozenset(
    ["true", "not", "and", "or", "implies", "until", "ev", "alw", "in", "abs"])

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>-?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<cmp><=|>=|<|>)
  | (?P<punct>[\[\](),:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num | name | keyword | cmp | punct | end
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaError(
                f"line {line}, column {col}: unexpected character {text[pos]!r}")
        lexeme = m.group(0)
        kind = m.lastgroup or ""
        if kind == "name" and lexeme in _KEYWORDS:
            kind = "keyword"
        if kind != "ws":
            tokens.append(_Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(_Token("end", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent over the grammar in the README)
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def error(self, tok: _Token, msg: str) -> FormulaError:
        where = f"line {tok.line}, column {tok.col}"
        got = "end of input" if tok.kind == "end" else repr(tok.text)
        return FormulaError(f"{where}: {msg} (got {got})")

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text is not None else kind
            raise self.error(tok, f"expected {want}")
        return self.advance()

    def parse(self) -> Formula:
        f = self.formula()
        tok = self.peek()
        if tok.kind != "end":
            raise self.error(tok, "unexpected trailing input")
        return f

    def formula(self) -> Formula:
        first = self.term()
        tok = self.peek()
        if tok.kind != "keyword" or tok.text not in ("and", "or", "implies"):
            return first
        connective = tok.text
        if connective == "implies":
            self.advance()
            rhs = self.term()
            return Implies(first, rhs)
        parts = [first]
        while (self.peek().kind == "keyword"
               and self.peek().text in ("and", "or", "implies")):
            tok = self.advance()
            if tok.text != connective:
                raise self.error(
                    tok, f"cannot mix '{connective}' and '{tok.text}' "
                    "without parentheses")
            parts.append(self.term())
        flat: list[Formula] = []
        node_type = And if connective == "and" else Or
        for p in parts:
            # flatten chains so the n-ary aggregator sees all operands at once
            if isinstance(p, node_type):
                flat.extend(p.children)
            else:
                flat.append(p)
        return node_type(tuple(flat))

    def term(self) -> Formula:
        left = self.unary_term()
        while self.peek().kind == "keyword" and self.peek().text == "until":
            self.advance()
            iv = self.interval()
            right = self.unary_term()
            left = Until(iv, left, right)
        return left

    def unary_term(self) -> Formula:
        tok = self.peek()
        if tok.kind == "keyword":
            if tok.text == "true":
                self.advance()
                return TRUE
            if tok.text == "not":
                self.advance()
                return Not(self.unary_term())
            if tok.text == "ev":
                self.advance()
                iv = self.interval()
                return Eventually(iv, self.unary_term())
            if tok.text == "alw":
                self.advance()
                iv = self.interval()
                return Always(iv, self.unary_term())
            if tok.text == "abs":
                return self.abs_predicate()
            raise self.error(tok, "expected a formula")
        if tok.kind == "punct" and tok.text == "(":
            self.advance()
            inner = self.formula()
            self.expect("punct", ")")
            return inner
        if tok.kind == "name":
            return self.predicate()
        raise self.error(tok, "expected a formula")

    def interval(self) -> Interval:
        self.expect("punct", "[")
        lo_tok = self.expect("num")
        self.expect("punct", ":")
        hi_tok = self.expect("num")
        self.expect("punct", "]")
        lo = self.int_bound(lo_tok)
        hi = self.int_bound(hi_tok)
        try:
            return Interval(lo, hi)
        except FormulaError as exc:
            raise FormulaError(
                f"line {lo_tok.line}, column {lo_tok.col}: {exc}") from None

    def int_bound(self, tok: _Token) -> int:
        try:
            value = int(tok.text)
        except ValueError:
            raise self.error(tok, "interval bounds must be integers") from None
        if value < 0:
            raise self.error(tok, "interval bounds must be >= 0")
        return value

    def number(self) -> float:
        tok = self.expect("num")
        return float(tok.text)

    def predicate(self) -> Formula:
        sig_tok = self.expect("name")
        tok = self.peek()
        if tok.kind == "cmp":
            op = self.advance().text
            c = self.number()
            return Pred(Comparison(sig_tok.text, op, c))
        if tok.kind == "keyword" and tok.text == "in":
            self.advance()
            self.expect("punct", "[")
            lo = self.number()
            self.expect("punct", ",")
            hi = self.number()
            self.expect("punct", "]")
            if not lo < hi:
                raise self.error(
                    sig_tok, f"empty membership interval [{lo}, {hi}]")
            return Pred(Membership(sig_tok.text, lo, hi))
        raise self.error(tok, "expected a comparison or 'in'")

    def abs_predicate(self) -> Formula:
        abs_tok = self.expect("keyword", "abs")
        self.expect("punct", "(")
        sig_tok = self.expect("name")
        self.expect("punct", ")")
        op_tok = self.expect("cmp")
        c = self.number()
        op = op_tok.text
        # abs(s) < c is the band |s| < c, i.e. membership in (-c, c);
        # abs(s) > c is its complement, a disjunction of the two tails
        if op in ("<", "<="):
            if c <= 0:
                raise self.error(
                    abs_tok, f"abs(..) {op} {_fmt_num(c)} is unsatisfiable")
            return Pred(Membership(sig_tok.text, -c, c))
        return Or((
            Pred(Comparison(sig_tok.text, ">", c)),
            Pred(Comparison(sig_tok.text, "<", -c)),
        ))


def parse_formula(text: str) -> Formula:
    """Parse formula text into a flattened, desugared AST.

    Raises FormulaError with line/column on syntax errors, empty
    intervals, and unsatisfiable abs() bands.
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

def _fmt_num(x: float) -> str:
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


def print_formula(f: Formula) -> str:
    """Render a formula as canonical text; parse_formula inverts it."""
    if isinstance(f, TrueFormula):
        return "true"
    if isinstance(f, Pred):
        p = f.pred
        if isinstance(p, Comparison):
            return f"{p.signal} {p.op} {_fmt_num(p.c)}"
        return f"{p.signal} in [{_fmt_num(p.lo)}, {_fmt_num(p.hi)}]"
    if isinstance(f, Not):
        return f"not ({print_formula(f.child)})"
    if isinstance(f, And):
        return " and ".join(f"({print_formula(c)})" for c in f.children)
    if isinstance(f, Or):
        return " or ".join(f"({print_formula(c)})" for c in f.children)
    if isinstance(f, Implies):
        return (f"({print_formula(f.lhs)}) implies ({print_formula(f.rhs)})")
    if isinstance(f, Until):
        iv = f.interval
        return (f"({print_formula(f.lhs)}) until[{iv.lo}:{iv.hi}] "
                f"({print_formula(f.rhs)})")
    if isinstance(f, Eventually):
        iv = f.interval
        return f"ev[{iv.lo}:{iv.hi}] ({print_formula(f.child)})"
    if isinstance(f, Always):
        iv = f.interval
        return f"alw[{iv.lo}:{iv.hi}] ({print_formula(f.child)})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------

def horizon(f: Formula) -> int:
    """Number of future steps the formula needs beyond its anchor."""
    if isinstance(f, (TrueFormula, Pred)):
        return 0
    if isinstance(f, Not):
        return horizon(f.child)
    if isinstance(f, (And, Or)):
        return max(horizon(c) for c in f.children)
    if isinstance(f, Implies):
        return max(horizon(f.lhs), horizon(f.rhs))
    if isinstance(f, Until):
        return f.interval.hi + max(horizon(f.lhs), horizon(f.rhs))
    if isinstance(f, (Eventually, Always)):
        return f.interval.hi + horizon(f.child)
    raise TypeError(f"not a formula: {f!r}")


def signals_of(f: Formula) -> frozenset[str]:
    """Exact set of signal names the formula reads."""
    if isinstance(f, TrueFormula):
        return frozenset()
    if isinstance(f, Pred):
        return frozenset((f.pred.signal,))
    if isinstance(f, Not):
        return signals_of(f.child)
    if isinstance(f, (And, Or)):
        out: frozenset[str] = frozenset()
        for c in f.children:
            out |= signals_of(c)
        return out
    if isinstance(f, Implies):
        return signals_of(f.lhs) | signals_of(f.rhs)
    if isinstance(f, Until):
        return signals_of(f.lhs) | signals_of(f.rhs)
    if isinstance(f, (Eventually, Always)):
        return signals_of(f.child)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Signal domains (normalization input)
# ---------------------------------------------------------------------------

def load_domains_csv(path: str) -> dict[str, SignalDomain]:
    """Load a `signal,lo,hi` CSV into a domain map keyed by signal name."""
    domains: dict[str, SignalDomain] = {}
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["signal", "lo", "hi"]:
            raise FormulaError(
                f"{path}: expected header 'signal,lo,hi', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise FormulaError(
                    f"{path}, line {lineno}: expected 3 fields, got {len(row)}")
            name = row[0].strip()
            try:
                lo, hi = float(row[1]), float(row[2])
            except ValueError:
                raise FormulaError(
                    f"{path}, line {lineno}: non-numeric bound") from None
            if name in domains:
                raise FormulaError(
                    f"{path}, line {lineno}: duplicate domain for {name!r}")
            domains[name] = SignalDomain(name, lo, hi)
    return domains
