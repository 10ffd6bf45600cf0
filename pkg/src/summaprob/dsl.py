"""The ``.sumprob`` scenario format: hand-written LL(1) parser and canonical printer.

Example::

    scenario "ex21" {
      limit = "2";
      index_set = floor_power(2,1);
      on_tail = 1;
      off_tail = pow(1 - eps/2, k) offtail_monotone;
    }

``num/den`` with no spaces is lexed as one rational literal; ``#`` starts a
line comment. ``format_scenario`` emits a canonical single line such that
``parse_scenario(format_scenario(s)) == s``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import expr as ex
from . import index_sets as isets
from . import lacunary as lac
from .errors import DomainError, ExpressionOutOfRange, SummaError
from .models import Scenario, TailModel

METHOD_KEYS = ("alpha", "delta", "eps", "p")
FIELD_KEYS = ("limit", "index_set", "on_tail", "off_tail", "theta") + METHOD_KEYS + ("param",)
SET_CTORS = ("floor_power", "self_power", "factorial_parity", "block_prefix", "ratio_blocks",
             "empty", "all", "list")
THETA_CTORS = ("powers", "factorial_even", "factorial_odd", "ratio_controlled", "list")
EXPR_STARTS = ("number", "k", "eps", "pow", "min", "max", "(", "-")
KEYWORDS = frozenset(FIELD_KEYS + SET_CTORS + THETA_CTORS + ex.FUNCTIONS + ex.VARIABLES
                     + ("scenario", "offtail_monotone", "even", "odd"))


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    offset: int  # bytes from the start of the input
    length: int = 1  # bytes

    def covers(self, start: int, end: int) -> bool:
        """True if this span overlaps the byte range [start, end)."""
        return self.offset < end and start < self.offset + max(self.length, 1)


class ParseError(SummaError):
    def __init__(self, message, span, expected=()):
        super().__init__(message)
        self.message = message
        self.span = span
        self.expected = tuple(expected)

    def __str__(self):
        text = f"line {self.span.line}, column {self.span.column}: {self.message}"
        if self.expected:
            text += " (expected one of: " + ", ".join(self.expected) + ")"
        return text


class ValidationError(SummaError):
    def __init__(self, message, span=None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self):
        if self.span is None:
            return self.message
        return f"line {self.span.line}, column {self.span.column}: {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, rational, string, sym, eof
    text: str
    value: object
    span: SourceSpan


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<rational>\d+/\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<sym>[{}()\[\],;=+\-*/])
""", re.VERBOSE)


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    encoded_upto = [0, 0]  # (char index, byte offset) memo for byte offsets

    def byte_offset(i):
        ci, bo = encoded_upto
        bo += len(text[ci:i].encode("utf-8"))
        encoded_upto[:] = [i, bo]
        return bo

    def span_at(i, j):
        start = byte_offset(i)
        return SourceSpan(line, i - line_start + 1, start, len(text[i:j].encode("utf-8")))

    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == '"':
                raise ParseError("unterminated string", span_at(pos, pos + 1), ('"',))
            raise ParseError(f"unexpected character {text[pos]!r}", span_at(pos, pos + 1))
        kind = m.lastgroup
        chunk = m.group()
        if kind == "ws":
            for i, ch in enumerate(chunk):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        else:
            span = span_at(pos, m.end())
            if kind == "rational":
                num, den = chunk.split("/")
                if int(den) == 0:
                    raise ParseError("zero denominator", span, ("positive denominator",))
                value = Fraction(int(num), int(den))
            elif kind == "int":
                value = int(chunk)
            elif kind == "string":
                value = re.sub(r"\\(.)", r"\1", chunk[1:-1])
            else:
                value = chunk
            tokens.append(Token(kind, chunk, value, span))
        pos = m.end()
    tokens.append(Token("eof", "", None, span_at(pos, pos)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, expected, message=None):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(message or f"unexpected {found}", t.span, expected)

    def expect_sym(self, sym):
        if self.tok.kind == "sym" and self.tok.text == sym:
            return self.advance()
        self.fail((sym,))

    def at_sym(self, sym):
        return self.tok.kind == "sym" and self.tok.text == sym

    def expect_word(self, words):
        if self.tok.kind == "ident" and self.tok.text in words:
            return self.advance()
        if self.tok.kind == "ident":
            self.fail(words, f"unknown identifier {self.tok.text!r}")
        self.fail(words)

    def expect_int(self):
        if self.tok.kind == "int":
            return self.advance().value
        self.fail(("integer",))

    def rational(self):
        negative = False
        if self.at_sym("-"):
            self.advance()
            negative = True
        if self.tok.kind in ("int", "rational"):
            value = Fraction(self.advance().value)
            return -value if negative else value
        self.fail(("number",))

    # -- scenario -------------------------------------------------------

    def scenario(self):
        self.expect_word(("scenario",))
        if self.tok.kind != "string":
            self.fail(("string",))
        name_tok = self.advance()
        self.expect_sym("{")
        fields = {}
        spans = {}
        params = {}
        if self.at_sym("}"):
            self.fail(FIELD_KEYS)
        while not self.at_sym("}"):
            key_tok = self.tok
            key = self.expect_word(FIELD_KEYS).text
            if key == "param":
                if self.tok.kind != "ident":
                    self.fail(("parameter name",))
                pname_tok = self.advance()
                self.expect_sym("=")
                if pname_tok.text in params or pname_tok.text in METHOD_KEYS:
                    raise ValidationError(f"parameter {pname_tok.text!r} bound twice", pname_tok.span)
                params[pname_tok.text] = (self.rational(), pname_tok.span)
            else:
                self.expect_sym("=")
                if key in fields:
                    raise ValidationError(f"field {key!r} given twice", key_tok.span)
                spans[key] = key_tok.span
                fields[key] = self.field_value(key)
            if self.at_sym(";"):
                self.advance()
            elif not self.at_sym("}"):
                self.fail((";", "}") + (("offtail_monotone",) if key == "off_tail" else ()))
        self.expect_sym("}")
        if self.tok.kind != "eof":
            self.fail(("end of input",))
        return self.build(name_tok, fields, spans, params)

    def field_value(self, key):
        if key == "limit":
            if self.tok.kind != "string":
                self.fail(("string",))
            return self.advance().value
        if key == "index_set":
            return self.index_set()
        if key == "theta":
            return self.theta()
        if key in ("on_tail", "off_tail"):
            start = self.tok.span
            value = self.expr()
            monotone = False
            if key == "off_tail" and self.tok.kind == "ident" and self.tok.text == "offtail_monotone":
                self.advance()
                monotone = True
            return value, monotone, start
        return self.rational()

    def build(self, name_tok, fields, spans, params):
        missing = [k for k in ("limit", "index_set", "on_tail", "off_tail") if k not in fields]
        if missing:
            raise ValidationError(f"scenario is missing field(s): {', '.join(missing)}", name_tok.span)
        if not name_tok.value:
            raise ValidationError("scenario name must be nonempty", name_tok.span)
        bindings = {name: value for name, (value, _) in params.items()}
        for key in METHOD_KEYS:
            if key in fields:
                bindings[key] = fields[key]
        _validate_method_params(bindings, {**spans, **{n: s for n, (_, s) in params.items()}})
        on_tail, _, on_span = fields["on_tail"]
        off_tail, monotone, off_span = fields["off_tail"]
        model = TailModel(fields["index_set"], on_tail, off_tail, fields["limit"], monotone)
        _validate_tails(model, bindings.get("eps", Fraction(1, 2)), on_span, off_span)
        return Scenario(name_tok.value, model, fields.get("theta"), bindings)

    # -- constructors ---------------------------------------------------

    def index_set(self):
        start = self.tok
        name = self.expect_word(SET_CTORS).text
        try:
            if name == "floor_power":
                self.expect_sym("(")
                s = self.expect_int()
                self.expect_sym(",")
                r = self.expect_int()
                self.expect_sym(")")
                return isets.FloorPower(s, r)
            if name == "self_power":
                return isets.SelfPower()
            if name == "factorial_parity":
                self.expect_sym("(")
                parity = self.expect_word(("even", "odd")).text
                self.expect_sym(")")
                return isets.FactorialParity(parity)
            if name == "block_prefix":
                self.expect_sym("(")
                theta = self.theta()
                self.expect_sym(",")
                c = self.rational()
                self.expect_sym(")")
                return isets.BlockPrefix(theta, c)
            if name == "ratio_blocks":
                self.expect_sym("(")
                j = self.expect_int()
                self.expect_sym(")")
                return isets.RatioBlocks(j)
            if name == "empty":
                return isets.Empty()
            if name == "all":
                return isets.All()
            return isets.FiniteList(tuple(self.int_list()))
        except DomainError as exc:
            raise ValidationError(str(exc), start.span) from None

    def theta(self):
        start = self.tok
        name = self.expect_word(THETA_CTORS).text
        try:
            if name == "powers":
                self.expect_sym("(")
                base = self.expect_int()
                self.expect_sym(")")
                return lac.Powers(base)
            if name == "factorial_even":
                return lac.FactorialEven()
            if name == "factorial_odd":
                return lac.FactorialOdd()
            if name == "ratio_controlled":
                self.expect_sym("(")
                j = self.expect_int()
                self.expect_sym(")")
                return lac.RatioControlled(j)
            return lac.ExplicitList(tuple(self.int_list()))
        except DomainError as exc:
            raise ValidationError(str(exc), start.span) from None

    def int_list(self):
        self.expect_sym("[")
        values = [self.expect_int()]
        while self.at_sym(","):
            self.advance()
            values.append(self.expect_int())
        self.expect_sym("]")
        return values

    # -- expressions ----------------------------------------------------

    def expr(self):
        node = self.term()
        while self.tok.kind == "sym" and self.tok.text in ("+", "-"):
            op = self.advance().text
            node = ex.BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "sym" and self.tok.text in ("*", "/"):
            op = self.advance().text
            node = ex.BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.at_sym("-"):
            self.advance()
            return ex.neg(self.unary())
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind in ("int", "rational"):
            self.advance()
            return ex.Num(Fraction(t.value))
        if t.kind == "ident":
            if t.text in ex.VARIABLES:
                self.advance()
                return ex.Var(t.text)
            if t.text in ex.FUNCTIONS:
                self.advance()
                self.expect_sym("(")
                a = self.expr()
                self.expect_sym(",")
                b = self.expr()
                self.expect_sym(")")
                return ex.Call(t.text, (a, b))
            self.fail(EXPR_STARTS, f"unknown identifier {t.text!r}")
        if self.at_sym("("):
            self.advance()
            node = self.expr()
            self.expect_sym(")")
            return node
        self.fail(EXPR_STARTS)


def _validate_method_params(bindings, spans):
    checks = {
        "alpha": (lambda v: 0 < v <= 1, "alpha must lie in (0, 1]"),
        "eps": (lambda v: v > 0, "eps must be positive"),
        "delta": (lambda v: 0 < v <= 1, "delta must lie in (0, 1]"),
        "p": (lambda v: v > 0, "p must be positive"),
    }
    for key, (ok, message) in checks.items():
        if key in bindings and not ok(bindings[key]):
            raise ValidationError(f"{message}, got {ex.format_rational(bindings[key])}", spans.get(key))


_SAMPLE_K = (1, 2, 3, 10, 100, 10**4, 10**6)


def _validate_tails(model, eps, on_span, off_span):
    for tail, span in ((model.on_tail, on_span), (model.off_tail, off_span)):
        for k in _SAMPLE_K:
            try:
                value = ex.evaluate(tail, k, float(eps))
            except ExpressionOutOfRange as exc:
                raise ValidationError(str(exc), span) from None
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"tail {tail} = {value!r} at k={k}, eps={eps} is outside [0, 1]", span)


def parse_scenario(text: str) -> Scenario:
    """Parse one scenario. Raises ParseError (syntax) or ValidationError (semantics)."""
    return _Parser(text).scenario()


def parse_expr(text: str) -> ex.Expr:
    p = _Parser(text)
    node = p.expr()
    if p.tok.kind != "eof":
        p.fail(("end of input",))
    return node


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_scenario(scenario: Scenario) -> str:
    """Canonical single-line text of a scenario."""
    model = scenario.model
    if not isinstance(model, TailModel):
        raise DomainError(f"only piecewise tail models have a text form, not {type(model).__name__}")
    parts = [
        f"limit = {_quote(model.limit_label)}",
        f"index_set = {model.on_set.describe()}",
        f"on_tail = {model.on_tail}",
        f"off_tail = {model.off_tail}" + (" offtail_monotone" if model.offtail_monotone else ""),
    ]
    if scenario.theta is not None:
        parts.append(f"theta = {scenario.theta.describe()}")
    params = dict(scenario.params)
    for key in METHOD_KEYS:
        if key in params:
            parts.append(f"{key} = {ex.format_rational(params.pop(key))}")
    for key in sorted(params):
        parts.append(f"param {key} = {ex.format_rational(params[key])}")
    return f"scenario {_quote(scenario.name)} {{ " + "; ".join(parts) + "; }"
