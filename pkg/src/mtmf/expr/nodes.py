"""Immutable expression-tree nodes.

Constants keep exact values whenever possible: integer literals are ``int``,
decimal literals become :class:`fractions.Fraction`, and only transcendental
folding produces ``float``.  Exact arithmetic is what lets the Lie-series and
Rodrigues code return exact rational coefficients.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Union

Number = Union[int, Fraction, float]

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt", "abs", "sign", "fact")


def norm_number(v) -> Number:
    """Collapse integral Fractions to int; leave floats alone."""
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v.numerator)
    return v


def is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def as_number(v) -> Number:
    if isinstance(v, (int, Fraction, float)):
        return norm_number(v)
    if hasattr(v, "dtype"):  # numpy scalar
        if v.dtype.kind in "iu":
            return int(v)
        return float(v)
    raise TypeError(f"not a number: {v!r}")


class Expr:
    """Base class.  Subclasses are immutable and structurally hashable."""

    __slots__ = ("_hash", "_fn", "_key", "_vars")

    def _init_cache(self, hashable) -> None:
        object.__setattr__(self, "_hash", hash((type(self).__name__,) + hashable))
        object.__setattr__(self, "_fn", None)
        object.__setattr__(self, "_key", None)
        object.__setattr__(self, "_vars", None)

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._fields() == other._fields()

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def _fields(self) -> tuple:
        raise NotImplementedError

    def children(self) -> tuple["Expr", ...]:
        return ()

    # --- convenience builders (no simplification) -------------------------
    def __add__(self, other):
        return Add((self, to_expr(other)))

    def __radd__(self, other):
        return Add((to_expr(other), self))

    def __sub__(self, other):
        return Add((self, Neg(to_expr(other))))

    def __rsub__(self, other):
        return Add((to_expr(other), Neg(self)))

    def __mul__(self, other):
        return Mul((self, to_expr(other)))

    def __rmul__(self, other):
        return Mul((to_expr(other), self))

    def __truediv__(self, other):
        return Div(self, to_expr(other))

    def __rtruediv__(self, other):
        return Div(to_expr(other), self)

    def __pow__(self, other):
        return Pow(self, to_expr(other))

    def __rpow__(self, other):
        return Pow(to_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __repr__(self) -> str:
        from .printing import to_text

        return f"Expr({to_text(self)!r})"

    def __str__(self) -> str:
        from .printing import to_text

        return to_text(self)

    def walk(self) -> Iterator["Expr"]:
        """Pre-order traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children()))

    def size(self) -> int:
        seen = set()
        count = 0
        for node in self.walk():
            if id(node) in seen:
                continue
            seen.add(id(node))
            count += 1
        return count

    def variables(self) -> frozenset[int]:
        """Indices of all variables referenced by the tree."""
        if self._vars is None:
            out: set[int] = set()
            for c in self.children():
                out |= c.variables()
            if isinstance(self, Var):
                out.add(self.index)
            object.__setattr__(self, "_vars", frozenset(out))
        return self._vars

    def has_params(self) -> bool:
        return any(isinstance(n, Param) for n in self.walk())


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        value = as_number(value)
        object.__setattr__(self, "value", value)
        self._init_cache((value,))

    def _fields(self):
        return (self.value,)


class Var(Expr):
    """Coordinate ``index`` of the evaluation point; ``name`` is cosmetic."""

    __slots__ = ("index", "name")

    def __init__(self, index: int, name: str | None = None):
        if index < 0:
            raise ValueError("variable index must be non-negative")
        object.__setattr__(self, "index", int(index))
        object.__setattr__(self, "name", name or f"x{index + 1}")
        self._init_cache((self.index,))

    def _fields(self):
        return (self.index,)


class Param(Expr):
    """Symbolic parameter (the ``n`` of coefficient generators)."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        self._init_cache((name,))

    def _fields(self):
        return (self.name,)


class Add(Expr):
    __slots__ = ("args",)

    def __init__(self, args):
        args = tuple(args)
        object.__setattr__(self, "args", args)
        self._init_cache(tuple(hash(a) for a in args))

    def _fields(self):
        return self.args

    def children(self):
        return self.args


class Mul(Expr):
    __slots__ = ("args",)

    def __init__(self, args):
        args = tuple(args)
        object.__setattr__(self, "args", args)
        self._init_cache(tuple(hash(a) for a in args))

    def _fields(self):
        return self.args

    def children(self):
        return self.args


class Neg(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        object.__setattr__(self, "arg", arg)
        self._init_cache((hash(arg),))

    def _fields(self):
        return (self.arg,)

    def children(self):
        return (self.arg,)


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        self._init_cache((hash(num), hash(den)))

    def _fields(self):
        return (self.num, self.den)

    def children(self):
        return (self.num, self.den)


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Expr):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)
        self._init_cache((hash(base), hash(exp)))

    def _fields(self):
        return (self.base, self.exp)

    def children(self):
        return (self.base, self.exp)


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)
        self._init_cache((name, hash(arg)))

    def _fields(self):
        return (self.name, self.arg)

    def children(self):
        return (self.arg,)


class Indicator(Expr):
    """Indicator of the half-open box ``prod [lo_i, hi_i)`` over x1..x_p."""

    __slots__ = ("box",)

    def __init__(self, box):
        box = tuple((as_number(lo), as_number(hi)) for lo, hi in box)
        for lo, hi in box:
            if not lo <= hi:
                raise ValueError(f"indicator box needs lo <= hi, got [{lo}, {hi}]")
        object.__setattr__(self, "box", box)
        self._init_cache(box)

    def _fields(self):
        return (self.box,)

    def variables(self):
        return frozenset(range(len(self.box)))


def to_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return Const(v)


ZERO = Const(0)
ONE = Const(1)


def const_value(e: Expr):
    """Numeric value when ``e`` is a literal constant, else ``None``."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Neg) and isinstance(e.arg, Const):
        return -e.arg.value
    return None


def exact_root(v: Number, q: int):
    """Exact q-th root of a non-negative rational, or None."""
    if not is_exact(v) or v < 0:
        return None
    v = Fraction(v)
    out = []
    for part in (v.numerator, v.denominator):
        r = round(part ** (1.0 / q)) if part else 0
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand**q == part:
                out.append(cand)
                break
        else:
            return None
    return norm_number(Fraction(out[0], out[1]))


def number_pow(base: Number, exponent: Number):
    """``base ** exponent`` kept exact when possible; None if undefined."""
    if is_exact(base) and isinstance(exponent, int):
        if base == 0 and exponent < 0:
            return None
        return norm_number(Fraction(base) ** exponent)
    if is_exact(base) and isinstance(exponent, Fraction):
        if base < 0:
            return None
        root = exact_root(base, exponent.denominator)
        if root is not None:
            if root == 0 and exponent < 0:
                return None
            return norm_number(Fraction(root) ** exponent.numerator)
        return float(base) ** float(exponent)
    b, x = float(base), float(exponent)
    if b < 0 and not float(x).is_integer():
        return None
    if b == 0 and x < 0:
        return None
    try:
        return math.pow(b, x)
    except OverflowError:
        return math.inf
