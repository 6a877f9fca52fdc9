"""Pratt parser for the infix expression grammar.

Precedence, tightest first: ``^`` (right associative), unary ``-``,
``* /``, ``+ -``.  An exponent may itself start with a sign, so ``x1^-2``
is accepted.  Indicators are written ``ind(lo1,hi1; lo2,hi2; ...)``.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Mapping, Sequence

from ..errors import ExprSyntaxError
from .nodes import (
    FUNCTIONS,
    Add,
    Const,
    Div,
    Expr,
    Func,
    Indicator,
    Mul,
    Neg,
    Param,
    Pow,
    Var,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),;])
    """,
    re.VERBOSE,
)

_BINARY_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40, "**": 40}
_UNARY_BP = 30


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def _number(lexeme: str):
    if re.fullmatch(r"\d+", lexeme):
        return int(lexeme)
    return Fraction(lexeme)


class _Parser:
    def __init__(self, text: str, names: Mapping[str, int], arity: int | None,
                 params: Sequence[str]):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = names
        self.arity = arity
        self.params = set(params)

    # token helpers
    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, lexeme: str):
        kind, lex, pos = self.advance()
        if lex != lexeme:
            what = "end of input" if kind == "end" else repr(lex)
            raise ExprSyntaxError(f"expected {lexeme!r}, found {what}", pos, self.text)

    def error(self, message: str, pos: int):
        raise ExprSyntaxError(message, pos, self.text)

    # grammar
    def parse(self) -> Expr:
        e = self.expr(0)
        kind, lex, pos = self.peek()
        if kind != "end":
            self.error(f"unexpected {lex!r}", pos)
        return e

    def expr(self, min_bp: int) -> Expr:
        left = self.prefix()
        while True:
            kind, lex, pos = self.peek()
            if kind != "op" or lex not in _BINARY_BP:
                break
            bp = _BINARY_BP[lex]
            if bp <= min_bp:
                break
            self.advance()
            if lex in ("^", "**"):
                right = self.expr(bp - 1)
                left = Pow(left, right)
            else:
                right = self.expr(bp)
                if lex == "+":
                    left = Add(_flat_add(left) + (right,))
                elif lex == "-":
                    left = Add(_flat_add(left) + (Neg(right),))
                elif lex == "*":
                    left = Mul(_flat_mul(left) + (right,))
                else:
                    left = Div(left, right)
        return left

    def prefix(self) -> Expr:
        kind, lex, pos = self.advance()
        if kind == "num":
            return Const(_number(lex))
        if kind == "op" and lex == "-":
            return Neg(self.expr(_UNARY_BP))
        if kind == "op" and lex == "+":
            return self.expr(_UNARY_BP)
        if kind == "op" and lex == "(":
            e = self.expr(0)
            self.expect(")")
            return e
        if kind == "name":
            return self.name(lex, pos)
        if kind == "end":
            self.error("unexpected end of input", pos)
        self.error(f"unexpected {lex!r}", pos)

    def name(self, lex: str, pos: int) -> Expr:
        nxt = self.peek()
        if nxt[1] == "(":
            if lex == "ind":
                return self.indicator(pos)
            if lex not in FUNCTIONS:
                self.error(f"unknown function {lex!r}", pos)
            self.advance()
            arg = self.expr(0)
            self.expect(")")
            return Func(lex, arg)
        if lex in self.names:
            idx = self.names[lex]
            if self.arity is not None and idx >= self.arity:
                self.error(
                    f"variable {lex!r} index out of range for arity {self.arity}", pos
                )
            return Var(idx, lex)
        m = re.fullmatch(r"x([1-9]\d*)", lex)
        if m:
            idx = int(m.group(1)) - 1
            if self.arity is not None and idx >= self.arity:
                self.error(
                    f"variable {lex!r} index out of range for arity {self.arity}", pos
                )
            return Var(idx, lex)
        if lex in self.params:
            return Param(lex)
        if lex == "pi":
            return Const(math.pi)
        if lex == "inf":
            return Const(math.inf)
        self.error(f"unknown identifier {lex!r}", pos)

    def indicator(self, pos: int) -> Expr:
        from .simplify import simplify

        self.expect("(")
        box = []
        while True:
            bounds = []
            for sep in (",", None):
                start = self.peek()[2]
                v = simplify(self.expr(0))
                if not isinstance(v, Const):
                    self.error("indicator bounds must be numeric constants", start)
                bounds.append(v.value)
                if sep:
                    self.expect(sep)
            box.append(tuple(bounds))
            kind, lex, p = self.advance()
            if lex == ")":
                break
            if lex != ";":
                self.error("expected ';' or ')' in indicator", p)
        try:
            return Indicator(box)
        except ValueError as exc:
            self.error(str(exc), pos)


def _flat_add(e: Expr) -> tuple:
    return e.args if isinstance(e, Add) else (e,)


def _flat_mul(e: Expr) -> tuple:
    return e.args if isinstance(e, Mul) else (e,)


def parse(
    text: str,
    arity: int | None = None,
    names: Mapping[str, int] | None = None,
    params: Sequence[str] = (),
) -> Expr:
    """Parse ``text`` into an :class:`Expr`.

    Variables are ``x1..xp`` (indices 0..p-1) plus any aliases in ``names``
    (for example ``{"x": 0, "t": 1}``).  Identifiers listed in ``params``
    become symbolic parameters such as the ``n`` of coefficient generators.
    ``arity``, when given, bounds every variable index.
    """
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return _Parser(text, dict(names or {}), arity, params).parse()
