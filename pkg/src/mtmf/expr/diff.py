"""Symbolic differentiation."""
from __future__ import annotations

from ..errors import NonDifferentiableError
from .nodes import (
    ONE,
    ZERO,
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
from .simplify import simplify


def _d(e: Expr, var: int, memo: dict) -> Expr:
    if var not in e.variables():
        return ZERO
    hit = memo.get(e)
    if hit is not None:
        return hit
    out = _rule(e, var, memo)
    memo[e] = out
    return out


def _rule(e: Expr, var: int, memo: dict) -> Expr:
    if isinstance(e, Var):
        return ONE if e.index == var else ZERO
    if isinstance(e, (Const, Param)):
        return ZERO
    if isinstance(e, Add):
        return Add(tuple(_d(a, var, memo) for a in e.args))
    if isinstance(e, Neg):
        return Neg(_d(e.arg, var, memo))
    if isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            da = _d(a, var, memo)
            if da == ZERO:
                continue
            rest = e.args[:i] + (da,) + e.args[i + 1:]
            terms.append(Mul(rest))
        return Add(tuple(terms)) if terms else ZERO
    if isinstance(e, Div):
        u, v = e.num, e.den
        du, dv = _d(u, var, memo), _d(v, var, memo)
        return Div(Add((Mul((du, v)), Neg(Mul((u, dv))))), Pow(v, Const(2)))
    if isinstance(e, Pow):
        b, x = e.base, e.exp
        db = _d(b, var, memo)
        if var not in x.variables():
            return Mul((x, Pow(b, Add((x, Const(-1)))), db))
        dx = _d(x, var, memo)
        if var not in b.variables():
            return Mul((e, Func("log", b), dx))
        # b^x (x' log b + x b'/b)
        return Mul((e, Add((Mul((dx, Func("log", b))), Div(Mul((x, db)), b)))))
    if isinstance(e, Func):
        u = e.arg
        du = _d(u, var, memo)
        name = e.name
        if name == "exp":
            return Mul((e, du))
        if name == "log":
            return Div(du, u)
        if name == "sin":
            return Mul((Func("cos", u), du))
        if name == "cos":
            return Neg(Mul((Func("sin", u), du)))
        if name == "sqrt":
            return Div(du, Mul((Const(2), e)))
        if name == "abs":
            # sign(0) = 0: one-sided use off the kink only
            return Mul((Func("sign", u), du))
        if name == "sign":
            return ZERO
        if name == "fact":
            raise NonDifferentiableError("factorial of a variable is not differentiable")
    if isinstance(e, Indicator):
        raise NonDifferentiableError(
            f"indicator {e.box} cannot be differentiated along x{var + 1}"
        )
    raise NonDifferentiableError(f"no derivative rule for {type(e).__name__}")


def diff(e: Expr, var: int, simplified: bool = True) -> Expr:
    """Exact derivative of ``e`` with respect to variable index ``var``."""
    if var < 0:
        raise ValueError("variable index must be non-negative")
    out = _d(e, var, {})
    return simplify(out) if simplified else out


def nth_derivative(e: Expr, var: int, n: int) -> Expr:
    """``n``-fold derivative, simplifying after every step; ``n=0`` is identity."""
    if n < 0:
        raise ValueError("derivative order must be non-negative")
    out = e
    for _ in range(n):
        out = diff(out, var)
    return out


def mixed_derivative(e: Expr, vars_: tuple[int, ...]) -> Expr:
    """Derivative along each index of ``vars_`` in turn."""
    out = e
    for v in vars_:
        out = diff(out, v)
    return out

