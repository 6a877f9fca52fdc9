"""Canonical-form simplification.

Every expression is rewritten as a sum of monomials over *atoms*,
``{((atom, exponent), ...): coefficient}``.  Primitive atoms are variables,
parameters, function calls, indicators and powers with a symbolic exponent.
Anything that cannot be distributed (a sum raised to a negative or
fractional power, ``(x^2)^(1/2)``, ``2^(1/2)``) becomes a composite atom
whose base is itself canonical; composite atoms expand again as soon as
their accumulated exponent is a non-negative integer.

Rewrites only hold where both sides are defined, e.g. ``x^-1 * x -> 1``.
The two deliberate exceptions to blind distribution are signs and even
powers: ``(-x)^(1/2)`` and ``(x^2)^(1/2)`` are left alone.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from ..budget import budget
from ..errors import BudgetExceededError
from .nodes import (
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
    is_exact,
    norm_number,
    number_pow,
)
from .printing import to_text

Mono = tuple  # tuple[(atom, exponent)] sorted by atom key
Poly = dict  # Mono -> coefficient; never mutated once returned

TERM_BUDGET = 200000


def atom_key(a: Expr) -> str:
    k = a._key
    if k is None:
        k = f"{type(a).__name__}:{to_text(a)}"
        object.__setattr__(a, "_key", k)
    return k


def _is_composite(a: Expr) -> bool:
    if isinstance(a, (Add, Mul, Neg, Const)):
        return True
    return isinstance(a, Pow) and isinstance(a.exp, Const)


def _is_exp(a: Expr) -> bool:
    return isinstance(a, Func) and a.name == "exp"


def _nonneg_int(x) -> bool:
    if isinstance(x, int):
        return x >= 0
    if isinstance(x, float):
        return x >= 0 and x.is_integer()
    return False


def _mul_num(a, b):
    return norm_number(a * b)


def _add_num(a, b):
    return norm_number(a + b)


def _is_zero(c) -> bool:
    return c == 0


# --- polynomial arithmetic ------------------------------------------------

def _padd(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for m, c in q.items():
        if m in out:
            s = _add_num(out[m], c)
            if _is_zero(s):
                del out[m]
            else:
                out[m] = s
        else:
            out[m] = c
    return out


def _pscale(p: Poly, c) -> Poly:
    if _is_zero(c):
        return {}
    return {m: _mul_num(v, c) for m, v in p.items()}


def _pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return {}
    limit = budget(TERM_BUDGET)
    if len(p) * len(q) > limit:
        raise BudgetExceededError(
            f"expansion of {len(p)} x {len(q)} terms exceeds budget {limit}"
        )
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            c = _mul_num(c1, c2)
            if not m1:
                prod = {m2: 1}
            elif not m2:
                prod = {m1: 1}
            else:
                prod = _normalize(list(m1) + list(m2), 1)
            for m, k in prod.items():
                v = _mul_num(k, c)
                if m in out:
                    s = _add_num(out[m], v)
                    if _is_zero(s):
                        del out[m]
                    else:
                        out[m] = s
                elif not _is_zero(v):
                    out[m] = v
    return out


def _normalize(pairs, coeff) -> Poly:
    """Merge ``(atom, exponent)`` pairs into a canonical polynomial."""
    merged: dict = {}
    exp_args = []
    for a, x in pairs:
        if _is_exp(a):
            exp_args.append((a.arg, x))
            continue
        if a in merged:
            merged[a] = _add_num(merged[a], x)
        else:
            merged[a] = x
    if exp_args:
        total: Poly = {}
        for arg, x in exp_args:
            total = _padd(total, _pscale(_to_poly(arg), x))
        if total:
            if list(total) == [()]:
                v = total[()]
                if isinstance(v, float):
                    coeff = _mul_num(coeff, math.exp(v))
                else:
                    merged[Func("exp", Const(v))] = 1
            else:
                merged[Func("exp", _rebuild(total))] = 1
    result: Poly = {(): coeff}
    mono = []
    for a, x in merged.items():
        if _is_zero(x):
            continue
        if isinstance(a, Indicator) and x > 0:
            x = 1
        if _is_composite(a) and _nonneg_int(x):
            result = _pmul(result, _ppow(_to_poly(a), int(x)))
            continue
        mono.append((a, x))
    mono.sort(key=lambda ax: atom_key(ax[0]))
    mono_t = tuple(mono)
    if mono_t:
        if result == {(): coeff}:
            return {mono_t: coeff}
        result = _pmul(result, {mono_t: 1})
    return result


def _atom_poly(a: Expr, x=1) -> Poly:
    return _normalize([(a, x)], 1)


def _ppow(p: Poly, r) -> Poly:
    r = norm_number(r)
    if isinstance(r, float) and r.is_integer():
        r = int(r)
    if _is_zero(r):
        return {(): 1}
    if not p:
        if r > 0:
            return {}
        return {((Const(0), r),): 1}
    if len(p) == 1:
        (mono, c), = p.items()
        if isinstance(r, int):
            rc = number_pow(c, r)
            if rc is not None:
                pairs = [(a, _mul_num(x, r)) for a, x in mono]
                return _normalize(pairs, rc)
        elif _can_distribute(mono, c, r):
            rc = number_pow(c, r)
            pairs = [(a, _mul_num(x, r)) for a, x in mono]
            return _normalize(pairs, rc)
        return {((_rebuild(p), r),): 1}
    if isinstance(r, int) and r > 0:
        out: Poly = {(): 1}
        base = p
        k = r
        while k:
            if k & 1:
                out = _pmul(out, base)
            k >>= 1
            if k:
                base = _pmul(base, base)
        return out
    return {((_rebuild(p), r),): 1}


def _can_distribute(mono, c, r) -> bool:
    if not c > 0:
        return False
    if is_exact(c) and c != 1:
        rc = number_pow(c, r)
        if rc is None or not is_exact(rc):
            return False
    for a, x in mono:
        if isinstance(x, int) and x % 2 == 0:
            return False
        if isinstance(x, float) and x.is_integer() and int(x) % 2 == 0:
            return False
    return True


# --- expression -> polynomial ----------------------------------------------

def _fold_func(name: str, v):
    """Fold a function of a numeric constant; None keeps it symbolic."""
    if name == "abs":
        return abs(v)
    if name == "sign":
        return (v > 0) - (v < 0)
    if name == "fact":
        if is_exact(v) and isinstance(v, int) and v >= 0:
            return math.factorial(v)
        if isinstance(v, float) and v.is_integer() and v >= 0:
            return float(math.factorial(int(v)))
        return None
    if is_exact(v):
        exact = {
            ("exp", 0): 1,
            ("log", 1): 0,
            ("sin", 0): 0,
            ("cos", 0): 1,
        }
        return exact.get((name, v))
    if name == "log" and not v > 0:
        return None
    try:
        return float(getattr(math, name)(v))
    except (ValueError, OverflowError):
        return None


@lru_cache(maxsize=100_000)
def _to_poly(e: Expr) -> Poly:
    if isinstance(e, Const):
        return {} if _is_zero(e.value) else {(): e.value}
    if isinstance(e, (Var, Param, Indicator)):
        return {((e, 1),): 1}
    if isinstance(e, Add):
        out: Poly = {}
        for a in e.args:
            out = _padd(out, _to_poly(a))
        return out
    if isinstance(e, Neg):
        return _pscale(_to_poly(e.arg), -1)
    if isinstance(e, Mul):
        out = {(): 1}
        for a in e.args:
            out = _pmul(out, _to_poly(a))
            if not out:
                break
        return out
    if isinstance(e, Div):
        return _pmul(_to_poly(e.num), _ppow(_to_poly(e.den), -1))
    if isinstance(e, Pow):
        ex = simplify(e.exp)
        if isinstance(ex, Const):
            return _ppow(_to_poly(e.base), ex.value)
        base = simplify(e.base)
        if isinstance(base, Const) and base.value == 1:
            return {(): 1}
        if _is_exp(base):
            return _to_poly(Func("exp", Mul((base.arg, ex))))
        return _atom_poly(Pow(base, ex))
    if isinstance(e, Func):
        arg = simplify(e.arg)
        name = e.name
        if name == "sqrt":
            return _ppow(_to_poly(arg), Fraction(1, 2))
        if isinstance(arg, Const):
            v = _fold_func(name, arg.value)
            if v is not None:
                return {} if _is_zero(v) else {(): norm_number(v)}
        if name == "exp" and isinstance(arg, Func) and arg.name == "log":
            return _to_poly(arg.arg)
        if name == "log" and _is_exp(arg):
            return _to_poly(arg.arg)
        return _atom_poly(Func(name, arg))
    raise TypeError(f"cannot simplify {type(e).__name__}")


# --- polynomial -> expression ----------------------------------------------

def _degree(mono) -> float:
    return sum(float(x) for _, x in mono)


def _mono_key(mono) -> str:
    return "*".join(f"{atom_key(a)}^{x}" for a, x in mono)


def _factor(a: Expr, x) -> Expr:
    return a if x == 1 and not isinstance(x, float) else Pow(a, Const(x))


def _term(mono, c) -> Expr:
    if not mono:
        return Const(c)
    factors = tuple(_factor(a, x) for a, x in mono)
    if c == 1 and not isinstance(c, float):
        return factors[0] if len(factors) == 1 else Mul(factors)
    if c == -1 and not isinstance(c, float):
        return Neg(factors[0] if len(factors) == 1 else Mul(factors))
    if c < 0:
        return Neg(Mul((Const(-c),) + factors))
    return Mul((Const(c),) + factors)


def _rebuild(p: Poly) -> Expr:
    if not p:
        return Const(0)
    items = sorted(p.items(), key=lambda mc: (-_degree(mc[0]), _mono_key(mc[0])))
    terms = tuple(_term(m, c) for m, c in items)
    return terms[0] if len(terms) == 1 else Add(terms)


@lru_cache(maxsize=100_000)
def simplify(e: Expr) -> Expr:
    """Value-equivalent canonical form; idempotent."""
    return _rebuild(_to_poly(e))


def to_poly(e: Expr) -> Poly:
    """Canonical polynomial over atoms (read-only dict)."""
    return _to_poly(e)


def from_poly(p: Poly) -> Expr:
    return _rebuild(p)


def expand(e: Expr) -> Expr:
    return simplify(e)
