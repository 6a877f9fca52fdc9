"""Render expression trees as text accepted back by :func:`parse`."""
from __future__ import annotations

import math
from fractions import Fraction

from .nodes import Add, Const, Div, Expr, Func, Indicator, Mul, Neg, Param, Pow, Var

# binding strength of the outermost operator of a printed node
_ADD, _MUL, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


def format_number(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if v.is_integer() and abs(v) < 1e16:
            return f"{v:.1f}"
        return repr(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(v)


def _const_prec(v) -> int:
    if v < 0:
        return _UNARY if not isinstance(v, Fraction) else _MUL
    if isinstance(v, Fraction):
        return _MUL
    return _ATOM


def _render(e: Expr, names) -> tuple[str, int]:
    if isinstance(e, Const):
        return format_number(e.value), _const_prec(e.value)
    if isinstance(e, Var):
        if names is not None and e.index in names:
            return names[e.index], _ATOM
        return e.name, _ATOM
    if isinstance(e, Param):
        return e.name, _ATOM
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg, names)})", _ATOM
    if isinstance(e, Indicator):
        parts = [f"{format_number(lo)},{format_number(hi)}" for lo, hi in e.box]
        return f"ind({';'.join(parts)})", _ATOM
    if isinstance(e, Neg):
        s, p = _render(e.arg, names)
        if p < _POW:
            s = f"({s})"
        return f"-{s}", _UNARY
    if isinstance(e, Pow):
        bs, bp = _render(e.base, names)
        if bp <= _POW:
            bs = f"({bs})"
        xs, xp = _render(e.exp, names)
        # a leading minus is fine in an exponent: x^-2
        if xp < _POW and xp != _UNARY:
            xs = f"({xs})"
        return f"{bs}^{xs}", _POW
    if isinstance(e, Div):
        ns, np_ = _render(e.num, names)
        if np_ < _MUL:
            ns = f"({ns})"
        ds, dp = _render(e.den, names)
        if dp <= _MUL:
            ds = f"({ds})"
        return f"{ns}/{ds}", _MUL
    if isinstance(e, Mul):
        if not e.args:
            return "1", _ATOM
        parts = []
        for i, a in enumerate(e.args):
            s, p = _render(a, names)
            if p < _MUL or (i > 0 and p == _UNARY):
                s = f"({s})"
            elif i > 0 and p == _MUL and not isinstance(a, Mul):
                # a/b after another factor: "c*(a/b)" keeps the tree shape
                s = f"({s})"
            parts.append(s)
        return "*".join(parts), _MUL
    if isinstance(e, Add):
        if not e.args:
            return "0", _ATOM
        out = ""
        for i, a in enumerate(e.args):
            neg = None
            if i > 0:
                if isinstance(a, Neg):
                    neg = a.arg
                elif isinstance(a, Const) and a.value < 0:
                    neg = Const(-a.value)
            if neg is not None:
                s, p = _render(neg, names)
                if p <= _ADD:
                    s = f"({s})"
                out += f" - {s}"
                continue
            s, p = _render(a, names)
            if p <= _ADD and i > 0:
                s = f"({s})"
            out = s if i == 0 else f"{out} + {s}"
        return out, _ADD
    raise TypeError(f"cannot print {type(e).__name__}")


def to_text(e: Expr, names: dict[int, str] | None = None) -> str:
    """Infix text for ``e``; ``names`` optionally renames variable indices."""
    return _render(e, names)[0]
