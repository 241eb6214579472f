"""State formulas, multi-until path formulas and their concrete syntax.

Grammar::

    query     := threshold | path
    threshold := 'P' cmp number '(' path ')'
    cmp       := '>=' | '<=' | '>' | '<'
    path      := statef ( 'U' '[' number ',' number ']' statef )+
    statef    := and ( '|' and )*
    and       := not ( '&' not )*
    not       := '!' not | '(' statef ')' | 'true' | 'false' | IDENT

``!`` binds tighter than ``&``, which binds tighter than ``|``.  Binary
operators associate to the left.
"""

from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass
from typing import Union

from .errors import QuerySyntaxError, ValidationError

KEYWORDS = frozenset({"U", "P", "true", "false"})
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


# -- state formulas ---------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    arg: "StateFormula"


@dataclass(frozen=True)
class And:
    left: "StateFormula"
    right: "StateFormula"


@dataclass(frozen=True)
class Or:
    left: "StateFormula"
    right: "StateFormula"


StateFormula = Union[Const, Atom, Not, And, Or]

TRUE = Const(True)
FALSE = Const(False)


def conj(f, g):
    return And(f, g)


def disj(f, g):
    return Or(f, g)


def neg(f):
    return Not(f)


def atoms_of(f):
    """Set of proposition names occurring in ``f``."""
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, Const):
        return set()
    if isinstance(f, Not):
        return atoms_of(f.arg)
    return atoms_of(f.left) | atoms_of(f.right)


def evaluate(f, labels):
    """Truth of ``f`` under the set of propositions ``labels``."""
    if isinstance(f, Atom):
        return f.name in labels
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not evaluate(f.arg, labels)
    if isinstance(f, And):
        return evaluate(f.left, labels) and evaluate(f.right, labels)
    if isinstance(f, Or):
        return evaluate(f.left, labels) or evaluate(f.right, labels)
    raise TypeError(f"not a state formula: {f!r}")


# -- path formulas ----------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError(f"interval bounds must be finite: [{self.lo}, {self.hi}]")
        if not 0 <= self.lo <= self.hi:
            raise ValidationError(f"interval must satisfy 0 <= lo <= hi: [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class MultiUntilQuery:
    """``f1 U[a1,b1] f2 ... U[a_{n-1},b_{n-1}] fn``."""

    layers: tuple
    intervals: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "intervals", tuple(self.intervals))
        if len(self.layers) < 2:
            raise ValidationError("a multi-until formula needs at least two layers")
        if len(self.intervals) != len(self.layers) - 1:
            raise ValidationError(
                f"{len(self.layers)} layers need {len(self.layers) - 1} intervals, "
                f"got {len(self.intervals)}")
        check_non_overlap(self.intervals)

    @property
    def n_layers(self):
        return len(self.layers)

    @property
    def horizon(self):
        return self.intervals[-1].hi


COMPARISONS = {
    ">": operator.gt,
    ">=": operator.ge,
    "<": operator.lt,
    "<=": operator.le,
}


@dataclass(frozen=True)
class ThresholdQuery:
    comparison: str
    bound: float
    path: MultiUntilQuery

    def __post_init__(self):
        if self.comparison not in COMPARISONS:
            raise ValidationError(f"unknown comparison {self.comparison!r}")
        if not 0.0 <= self.bound <= 1.0:
            raise ValidationError(f"probability bound {self.bound} outside [0, 1]")

    def holds(self, probability):
        return COMPARISONS[self.comparison](probability, self.bound)


def check_non_overlap(intervals, first=1):
    """Reject overlapping intervals; touching ones (b_i == a_{i+1}) are fine."""
    for i, (cur, nxt) in enumerate(zip(intervals, intervals[1:]), start=first):
        if cur.hi > nxt.lo:
            raise ValidationError(
                f"intervals {i} [{format_number(cur.lo)},{format_number(cur.hi)}] and {i + 1} "
                f"[{format_number(nxt.lo)},{format_number(nxt.hi)}] overlap; intervals must not "
                f"overlap (need b_i <= a_(i+1))")


# -- lexer ------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<cmp>>=|<=|>|<)
  | (?P<sym>[!&|()\[\],])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str   # 'number', 'ident', 'cmp', 'sym', 'eof'
    text: str
    offset: int


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def tok(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected):
        tok = self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise QuerySyntaxError(f"expected {expected}, found {found}", tok.offset)

    def is_sym(self, text):
        return self.tok.kind == "sym" and self.tok.text == text

    def expect_sym(self, text):
        if not self.is_sym(text):
            self.fail(repr(text))
        return self.advance()

    def number(self):
        if self.tok.kind != "number":
            self.fail("a number")
        return float(self.advance().text)

    def query(self):
        if self.tok.kind == "ident" and self.tok.text == "P":
            result = self.threshold()
        else:
            result = self.path()
        if self.tok.kind != "eof":
            self.fail("end of input")
        return result

    def threshold(self):
        start = self.advance().offset
        if self.tok.kind != "cmp":
            self.fail("a comparison ('>', '>=', '<', '<=')")
        cmp = self.advance().text
        bound_offset = self.tok.offset
        bound = self.number()
        if not 0.0 <= bound <= 1.0:
            raise QuerySyntaxError(f"probability bound {bound} outside [0, 1]", bound_offset)
        self.expect_sym("(")
        path = self.path()
        self.expect_sym(")")
        try:
            return ThresholdQuery(cmp, bound, path)
        except ValidationError as exc:
            raise QuerySyntaxError(str(exc), start) from None

    def path(self):
        start = self.tok.offset
        layers = [self.statef()]
        intervals = []
        while self.tok.kind == "ident" and self.tok.text == "U":
            u_offset = self.advance().offset
            self.expect_sym("[")
            lo = self.number()
            self.expect_sym(",")
            hi = self.number()
            self.expect_sym("]")
            try:
                intervals.append(Interval(lo, hi))
                check_non_overlap(intervals[-2:], first=max(len(intervals) - 1, 1))
            except ValidationError as exc:
                raise QuerySyntaxError(str(exc), u_offset) from None
            layers.append(self.statef())
        if not intervals:
            self.fail("'U[lo,hi]'")
        try:
            return MultiUntilQuery(tuple(layers), tuple(intervals))
        except ValidationError as exc:
            raise QuerySyntaxError(str(exc), start) from None

    def statef(self):
        left = self.conjunction()
        while self.is_sym("|"):
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.negation()
        while self.is_sym("&"):
            self.advance()
            left = And(left, self.negation())
        return left

    def negation(self):
        tok = self.tok
        if self.is_sym("!"):
            self.advance()
            return Not(self.negation())
        if self.is_sym("("):
            self.advance()
            inner = self.statef()
            self.expect_sym(")")
            return inner
        if tok.kind == "ident":
            if tok.text == "true":
                self.advance()
                return TRUE
            if tok.text == "false":
                self.advance()
                return FALSE
            if tok.text in KEYWORDS:
                self.fail("a state formula")
            self.advance()
            return Atom(tok.text)
        self.fail("a state formula")


def parse_query(text):
    """Parse a path formula or a ``P<cmp><bound> (...)`` threshold query."""
    return _Parser(text).query()


def parse_state_formula(text):
    p = _Parser(text)
    f = p.statef()
    if p.tok.kind != "eof":
        p.fail("end of input")
    return f


# -- printing ---------------------------------------------------------------

def format_number(x):
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


_PREC = {Or: 1, And: 2}


def format_state_formula(f):
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        inner = format_state_formula(f.arg)
        if isinstance(f.arg, (And, Or)):
            inner = f"({inner})"
        return "!" + inner
    prec = _PREC[type(f)]
    left = format_state_formula(f.left)
    right = format_state_formula(f.right)
    if _PREC.get(type(f.left), 3) < prec:
        left = f"({left})"
    # left-associative: an equal-precedence right child needs parentheses
    if _PREC.get(type(f.right), 3) <= prec:
        right = f"({right})"
    op = " & " if isinstance(f, And) else " | "
    return left + op + right


def format_query(q):
    """Canonical text for a query; ``parse_query(format_query(q)) == q``."""
    if isinstance(q, ThresholdQuery):
        return f"P{q.comparison} {format_number(q.bound)} ({format_query(q.path)})"
    parts = [format_state_formula(q.layers[0])]
    for iv, layer in zip(q.intervals, q.layers[1:]):
        parts.append(f"U[{format_number(iv.lo)},{format_number(iv.hi)}]")
        parts.append(format_state_formula(layer))
    return " ".join(parts)
