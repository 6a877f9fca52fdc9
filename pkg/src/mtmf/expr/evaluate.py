"""Numeric evaluation of expression trees.

Trees compile once into nested numpy closures operating on column vectors
(one array per variable).  Partial functions check their domain explicitly
and raise :class:`ExprDomainError` instead of producing NaN.
"""
from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import gamma

from ..errors import ArityError, ExprDomainError
from .nodes import Add, Const, Div, Expr, Func, Indicator, Mul, Neg, Param, Pow, Var

Kernel = Callable[[Sequence[np.ndarray], Mapping[str, float]], np.ndarray]


def _check(bad: np.ndarray, message: str) -> None:
    if np.any(bad):
        raise ExprDomainError(message)


def _compile(e: Expr, memo: dict) -> Kernel:
    hit = memo.get(e)
    if hit is not None:
        return hit
    fn = _build(e, memo)
    memo[e] = fn
    return fn


def _build(e: Expr, memo: dict) -> Kernel:
    if isinstance(e, Const):
        v = float(e.value)
        return lambda cols, prm: v
    if isinstance(e, Var):
        i = e.index
        return lambda cols, prm: cols[i]
    if isinstance(e, Param):
        name = e.name

        def param(cols, prm):
            try:
                return float(prm[name])
            except KeyError:
                raise ExprDomainError(f"unbound parameter {name!r}") from None

        return param
    if isinstance(e, Add):
        parts = [_compile(a, memo) for a in e.args]

        def add(cols, prm):
            acc = parts[0](cols, prm)
            for p in parts[1:]:
                acc = acc + p(cols, prm)
            return acc

        return add
    if isinstance(e, Mul):
        parts = [_compile(a, memo) for a in e.args]

        def mul(cols, prm):
            acc = parts[0](cols, prm)
            for p in parts[1:]:
                acc = acc * p(cols, prm)
            return acc

        return mul
    if isinstance(e, Neg):
        inner = _compile(e.arg, memo)
        return lambda cols, prm: -inner(cols, prm)
    if isinstance(e, Div):
        num = _compile(e.num, memo)
        den = _compile(e.den, memo)

        def div(cols, prm):
            d = den(cols, prm)
            _check(np.asarray(d) == 0, "division by zero")
            return num(cols, prm) / d

        return div
    if isinstance(e, Pow):
        return _build_pow(e, memo)
    if isinstance(e, Func):
        return _build_func(e, memo)
    if isinstance(e, Indicator):
        box = [(float(lo), float(hi)) for lo, hi in e.box]

        def ind(cols, prm):
            acc = 1.0
            for i, (lo, hi) in enumerate(box):
                x = cols[i]
                acc = acc * ((x >= lo) & (x < hi))
            return acc * 1.0

        return ind
    raise TypeError(f"cannot evaluate {type(e).__name__}")


def _build_pow(e: Pow, memo: dict) -> Kernel:
    base = _compile(e.base, memo)
    if isinstance(e.exp, Const):
        ev = e.exp.value
        k = float(ev)
        integral = k.is_integer()
        if integral and 0 <= k <= 8:
            ik = int(k)

            def small_int_pow(cols, prm):
                b = base(cols, prm)
                if ik == 0:
                    return np.ones_like(b) if isinstance(b, np.ndarray) else 1.0
                acc = b
                for _ in range(ik - 1):
                    acc = acc * b
                return acc

            return small_int_pow

        def const_pow(cols, prm):
            b = np.asarray(base(cols, prm), dtype=float)
            if k < 0:
                _check(b == 0, "zero raised to a negative power")
            if not integral:
                _check(b < 0, "negative base with non-integer exponent")
            out = np.power(b, k)
            return out if out.ndim else float(out)

        return const_pow
    expo = _compile(e.exp, memo)

    def pow_(cols, prm):
        b = np.asarray(base(cols, prm), dtype=float)
        x = np.asarray(expo(cols, prm), dtype=float)
        integral = np.equal(np.floor(x), x)
        _check((b < 0) & ~integral, "negative base with non-integer exponent")
        _check((b == 0) & (x < 0), "zero raised to a negative power")
        out = np.power(b, x)
        return out if out.ndim else float(out)

    return pow_


def _factorial(x):
    x = np.asarray(x, dtype=float)
    _check((x < 0) | (np.floor(x) != x), "factorial of a non-natural number")
    out = gamma(x + 1.0)
    return out if out.ndim else float(out)


def _build_func(e: Func, memo: dict) -> Kernel:
    arg = _compile(e.arg, memo)
    name = e.name
    if name == "exp":
        return lambda cols, prm: np.exp(arg(cols, prm))
    if name == "sin":
        return lambda cols, prm: np.sin(arg(cols, prm))
    if name == "cos":
        return lambda cols, prm: np.cos(arg(cols, prm))
    if name == "abs":
        return lambda cols, prm: np.abs(arg(cols, prm))
    if name == "sign":
        return lambda cols, prm: np.sign(arg(cols, prm))
    if name == "fact":
        return lambda cols, prm: _factorial(arg(cols, prm))
    if name == "log":

        def log(cols, prm):
            a = arg(cols, prm)
            _check(np.asarray(a) <= 0, "log of a non-positive number")
            return np.log(a)

        return log
    if name == "sqrt":

        def sqrt(cols, prm):
            a = arg(cols, prm)
            _check(np.asarray(a) < 0, "sqrt of a negative number")
            return np.sqrt(a)

        return sqrt
    raise TypeError(f"unknown function {name}")


def compile_expr(e: Expr) -> Kernel:
    """Compiled kernel ``f(cols, params)``; cached on the node."""
    fn = e._fn
    if fn is None:
        fn = _compile(e, {})
        object.__setattr__(e, "_fn", fn)
    return fn


def _columns(points: np.ndarray, e: Expr) -> list[np.ndarray]:
    need = max(e.variables(), default=-1) + 1
    if points.shape[1] < need:
        raise ArityError(
            f"expression uses {need} variable(s) but points have {points.shape[1]}"
        )
    return [points[:, i] for i in range(points.shape[1])]


def evaluate_many(e: Expr, points, params: Mapping[str, float] | None = None) -> np.ndarray:
    """Evaluate ``e`` at each row of ``points`` (shape ``(n, p)``)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    cols = _columns(pts, e)
    with np.errstate(all="ignore"):
        out = compile_expr(e)(cols, params or {})
    out = np.broadcast_to(np.asarray(out, dtype=float), (pts.shape[0],)).copy()
    if np.isnan(out).any():
        bad = int(np.flatnonzero(np.isnan(out))[0])
        raise ExprDomainError(f"expression is undefined at point {pts[bad].tolist()}")
    return out


def evaluate(e: Expr, point: Sequence[float] = (), params: Mapping[str, float] | None = None,
             arity: int | None = None) -> float:
    """IEEE double value of ``e`` at a single point."""
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    if arity is not None and pt.size != arity:
        raise ArityError(f"point has {pt.size} coordinates, expected {arity}")
    return float(evaluate_many(e, pt[None, :], params)[0])


def evaluate_columns(e: Expr, cols: Sequence[np.ndarray], params=None) -> np.ndarray:
    """Evaluate on pre-split coordinate columns of equal length (no copies)."""
    need = max(e.variables(), default=-1) + 1
    if len(cols) < need:
        raise ArityError(f"expression uses {need} variable(s) but {len(cols)} given")
    n = len(cols[0]) if cols else 1
    with np.errstate(all="ignore"):
        out = compile_expr(e)(cols, params or {})
    out = np.broadcast_to(np.asarray(out, dtype=float), (n,))
    if np.isnan(out).any():
        raise ExprDomainError("expression is undefined at some evaluation point")
    return out
