"""Univariate polynomial extraction, substitution and pretty printing."""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Mapping, Sequence

from ..errors import NotPolynomialError
from .nodes import Add, Const, Div, Expr, Func, Mul, Neg, Param, Pow, Var, is_exact, norm_number
from .printing import format_number
from .simplify import from_poly, simplify, to_poly

Coeffs = list  # ascending powers


def _trim(c: Coeffs) -> Coeffs:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c or [0]


def _cadd(a: Coeffs, b: Coeffs) -> Coeffs:
    n = max(len(a), len(b))
    return [norm_number((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) for i in range(n)]


def _cmul(a: Coeffs, b: Coeffs) -> Coeffs:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return [norm_number(v) for v in out]


def _cpow(a: Coeffs, k: int) -> Coeffs:
    out: Coeffs = [1]
    for _ in range(k):
        out = _cmul(out, a)
    return out


def _divmod(num: Coeffs, den: Coeffs):
    num = _trim(num)
    den = _trim(den)
    exact = all(is_exact(v) for v in num + den)
    rem = [Fraction(v) if exact else float(v) for v in num]
    lead = den[-1]
    if len(rem) < len(den):
        return [0], rem
    q = [0] * (len(rem) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        f = rem[i + len(den) - 1] / lead
        q[i] = f
        for j, d in enumerate(den):
            rem[i + j] -= f * d
    return [norm_number(v) for v in q], [norm_number(v) for v in rem[: len(den) - 1]]


def _base_coeffs(base: Expr, var: int) -> Coeffs:
    """Coefficients of a canonical base that must be polynomial in ``var``."""
    out: Coeffs = [0]
    for mono, c in to_poly(base).items():
        k = 0
        for a, x in mono:
            if isinstance(a, Var) and a.index == var and isinstance(x, int) and x >= 0:
                k = x
            else:
                raise NotPolynomialError(f"factor {a} is not polynomial in x{var + 1}")
        term = [0] * k + [c]
        out = _cadd(out, term)
    return out


def as_polynomial(e: Expr, var: int = 0, rel_tol: float = 1e-9) -> Coeffs:
    """Explicit coefficients ``[c0, c1, ...]`` of ``e`` as a polynomial in ``var``.

    Rational pieces such as ``(1-x)^-2 * (1-x)^2 * x`` are reduced by
    clearing denominators and dividing exactly; a non-zero remainder or any
    non-integer power raises :class:`NotPolynomialError`.
    """
    p = to_poly(simplify(e))
    # per term: coefficient, power of var, {base: integer exponent}
    terms = []
    min_exp: dict[Expr, int] = {}
    for mono, c in p.items():
        k = 0
        bases: dict[Expr, int] = {}
        for a, x in mono:
            if not (isinstance(x, int)):
                raise NotPolynomialError(f"non-integer power {x} of {a}")
            if isinstance(a, Var) and a.index == var:
                if x >= 0:
                    k = x
                    continue
            if isinstance(a, (Add, Var)) and var in a.variables() and a.variables() == {var}:
                bases[a] = x
                min_exp[a] = min(min_exp.get(a, 0), x)
                continue
            raise NotPolynomialError(f"factor {a} is not polynomial in x{var + 1}")
        terms.append((c, k, bases))
    shift = {b: -m for b, m in min_exp.items() if m < 0}
    base_c = {b: (_base_coeffs(b, var) if not isinstance(b, Var) else [0, 1]) for b in shift}
    num: Coeffs = [0]
    for c, k, bases in terms:
        t: Coeffs = [0] * k + [c]
        for b, s in shift.items():
            t = _cmul(t, _cpow(base_c[b], bases.get(b, 0) + s))
        num = _cadd(num, t)
    den: Coeffs = [1]
    for b, s in shift.items():
        den = _cmul(den, _cpow(base_c[b], s))
    q, r = _divmod(num, den)
    scale = max([abs(float(v)) for v in num] + [1.0])
    if any(is_exact(v) and v != 0 for v in r) or any(
        not is_exact(v) and abs(v) > rel_tol * scale for v in r
    ):
        raise NotPolynomialError("rational expression does not reduce to a polynomial")
    return _trim(q)


def poly_expr(coeffs: Sequence, var: int = 0) -> Expr:
    """Canonical expression for ascending coefficients in variable ``var``."""
    x = Var(var)
    terms = [Mul((Const(c), Pow(x, Const(k)))) for k, c in enumerate(coeffs) if c != 0]
    return simplify(Add(tuple(terms))) if terms else Const(0)


def format_polynomial(coeffs: Sequence, name: str = "x1") -> str:
    """Readable text with a common rational denominator, highest power first.

    ``[-1/2, 0, 3/2]`` becomes ``(3*x1^2 - 1)/2``.
    """
    coeffs = _trim(list(coeffs))
    exact = all(is_exact(c) for c in coeffs)
    den = 1
    if exact:
        den = 1
        for c in coeffs:
            den = lcm(den, Fraction(c).denominator)
        coeffs = [norm_number(Fraction(c) * den) for c in coeffs]
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = format_number(mag)
        else:
            mon = name if k == 1 else f"{name}^{k}"
            body = mon if mag == 1 else f"{format_number(mag)}*{mon}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    if not parts:
        return "0"
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    if den != 1:
        if len(parts) > 1:
            text = f"({text})"
        text = f"{text}/{den}"
    return text


def substitute(e: Expr, mapping: Mapping) -> Expr:
    """Replace variables (int keys) and parameters (str keys) by expressions."""
    repl = {k: (v if isinstance(v, Expr) else Const(v)) for k, v in mapping.items()}
    memo: dict = {}

    def go(n: Expr) -> Expr:
        hit = memo.get(n)
        if hit is not None:
            return hit
        if isinstance(n, Var):
            out = repl.get(n.index, n)
        elif isinstance(n, Param):
            out = repl.get(n.name, n)
        elif isinstance(n, Add):
            out = Add(tuple(go(a) for a in n.args))
        elif isinstance(n, Mul):
            out = Mul(tuple(go(a) for a in n.args))
        elif isinstance(n, Neg):
            out = Neg(go(n.arg))
        elif isinstance(n, Div):
            out = Div(go(n.num), go(n.den))
        elif isinstance(n, Pow):
            out = Pow(go(n.base), go(n.exp))
        elif isinstance(n, Func):
            out = Func(n.name, go(n.arg))
        else:
            out = n
        memo[n] = out
        return out

    return go(e)
