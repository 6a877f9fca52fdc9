"""The MTMF value x -> sum_{n in B} a_n(x) g(x)^n / n!.

A representation is the triple (B, a, g).  Coefficient families come in
three flavours: explicit finite lists of expressions, closed-form
generators in a symbol ``n``, and numeric closures (used for derived
objects such as products, recovered ODE coefficients and simple-function
approximations).  The base ``g`` is an :class:`Expr` or a
:class:`NumericFunction`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from . import kernels
from .errors import ArityError, MtmfError, SeriesOverflowError
from .expr import (
    Add,
    Const,
    Expr,
    Indicator,
    Mul,
    Pow,
    evaluate_many,
    parse,
    simplify,
    substitute,
)
from .indexset import IndexSet
from .quadrature import QuadratureSpec, integrate

# --------------------------------------------------------------------------
# fields and coefficient families


class NumericFunction:
    """Vectorised function on ``(m, p)`` point arrays with a fixed arity."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], arity: int, label: str = "<numeric>"):
        self.fn = fn
        self.arity = arity
        self.label = label

    def values(self, pts: np.ndarray) -> np.ndarray:
        out = np.asarray(self.fn(pts), dtype=float)
        return np.broadcast_to(out, (pts.shape[0],))

    def __repr__(self) -> str:
        return f"NumericFunction({self.label})"


Field = Union[Expr, NumericFunction]


def field_values(f: Field, pts: np.ndarray) -> np.ndarray:
    if isinstance(f, Expr):
        return evaluate_many(f, pts)
    return f.values(pts)


def field_arity(f: Field) -> int:
    if isinstance(f, Expr):
        return max(f.variables(), default=-1) + 1
    return f.arity


class Coefficients:
    """Family n -> a_n.  ``length`` is None for unbounded families."""

    length: int | None = None
    symbolic: bool = False

    def at(self, n: int) -> Field:
        raise NotImplementedError

    def values(self, n: int, pts: np.ndarray) -> np.ndarray:
        return field_values(self.at(n), pts)

    def required_arity(self) -> int:
        return 0


class ExprList(Coefficients):
    """Explicit ``[a_0, ..., a_{L-1}]``; missing indices are zero."""

    symbolic = True

    def __init__(self, exprs: Sequence):
        self.exprs = tuple(e if isinstance(e, Expr) else Const(e) for e in exprs)
        self.length = len(self.exprs)

    def at(self, n: int) -> Expr:
        return self.exprs[n] if 0 <= n < self.length else Const(0)

    def required_arity(self) -> int:
        return max((field_arity(e) for e in self.exprs), default=0)

    def __repr__(self) -> str:
        return f"ExprList({[str(e) for e in self.exprs]})"


class ExprGenerator(Coefficients):
    """Closed-form ``a_n`` written with a parameter symbol (default ``n``)."""

    symbolic = True

    def __init__(self, template: Expr, param: str = "n"):
        self.template = template
        self.param = param
        self._cache: dict[int, Expr] = {}

    def at(self, n: int) -> Expr:
        e = self._cache.get(n)
        if e is None:
            e = simplify(substitute(self.template, {self.param: Const(n)}))
            self._cache[n] = e
        return e

    def required_arity(self) -> int:
        return field_arity(self.template)

    def __repr__(self) -> str:
        return f"ExprGenerator({self.template})"


class NumericCoefficients(Coefficients):
    """``a_n`` given by ``fn(n, pts)``; optional symbolic access via ``sym(n)``."""

    def __init__(self, fn: Callable[[int, np.ndarray], np.ndarray], arity: int,
                 length: int | None = None, label: str = "<numeric>",
                 sym: Callable[[int], Expr] | None = None):
        self.fn = fn
        self.arity = arity
        self.length = length
        self.label = label
        self.sym = sym
        self.symbolic = sym is not None

    def at(self, n: int) -> Field:
        if self.sym is not None:
            return self.sym(n)
        return NumericFunction(lambda pts, n=n: self.fn(n, pts), self.arity, f"{self.label}[{n}]")

    def values(self, n: int, pts: np.ndarray) -> np.ndarray:
        if self.length is not None and n >= self.length:
            return np.zeros(pts.shape[0])
        out = np.asarray(self.fn(n, pts), dtype=float)
        return np.broadcast_to(out, (pts.shape[0],))

    def required_arity(self) -> int:
        return self.arity

    def __repr__(self) -> str:
        return f"NumericCoefficients({self.label})"


class ShiftedCoefficients(Coefficients):
    """``tau^k``: ``a_n -> a_{n+k}``."""

    def __init__(self, base: Coefficients, k: int):
        if k < 0:
            raise ValueError("shift must be non-negative")
        self.base = base
        self.k = k
        self.symbolic = base.symbolic
        self.length = None if base.length is None else max(base.length - k, 0)

    def at(self, n: int) -> Field:
        return self.base.at(n + self.k)

    def values(self, n: int, pts: np.ndarray) -> np.ndarray:
        return self.base.values(n + self.k, pts)

    def required_arity(self) -> int:
        return self.base.required_arity()


# --------------------------------------------------------------------------
# truncation


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule for infinite index sets."""

    max_terms: int = 64
    abs_tol: float = 1e-12
    consecutive_small: int = 3

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")
        if self.consecutive_small < 1:
            raise ValueError("consecutive_small must be at least 1")

    def merged(self, other: "TruncationPolicy") -> "TruncationPolicy":
        """Symmetric combination: the stricter of both."""
        return TruncationPolicy(
            max(self.max_terms, other.max_terms),
            min(self.abs_tol, other.abs_tol),
            max(self.consecutive_small, other.consecutive_small),
        )

    @staticmethod
    def from_dict(d: Mapping) -> "TruncationPolicy":
        unknown = set(d) - {"max_terms", "abs_tol", "consecutive_small"}
        if unknown:
            raise ValueError(f"unknown truncation keys: {sorted(unknown)}")
        return TruncationPolicy(**d)


@dataclass(frozen=True)
class EvalReport:
    """Outcome of a truncated evaluation over a batch of points."""

    terms: int
    converged: bool
    truncated: bool
    finite_B: bool
    last_n: int | None
    points_converged: int = 0
    points: int = 0

    def describe(self) -> str:
        if self.finite_B and not self.truncated:
            return f"exact finite sum ({self.terms} terms)"
        if self.converged:
            return f"converged after <= {self.terms} terms"
        return (f"truncated at max_terms ({self.terms} terms, last n={self.last_n}); "
                f"{self.points_converged}/{self.points} points converged")


# --------------------------------------------------------------------------
# the MTMF value


@dataclass(frozen=True)
class Mtmf:
    """Representation ``T_{g, a}(B)`` of arity ``arity``."""

    arity: int
    B: IndexSet
    a: Coefficients
    g: Field
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError("arity must be non-negative")
        need = max(self.a.required_arity(), field_arity(self.g))
        if need > self.arity:
            raise ArityError(f"coefficients or base use {need} variables, arity is {self.arity}")

    # index bookkeeping
    def effective_B(self) -> IndexSet:
        if self.a.length is not None:
            return self.B.intersect(IndexSet.range(self.a.length - 1))
        return self.B

    @property
    def is_finite(self) -> bool:
        return self.effective_B().is_finite

    def indices(self, max_terms: int | None = None) -> tuple[list[int], bool]:
        """First ``max_terms`` effective members and whether more exist."""
        cap = self.policy.max_terms if max_terms is None else max_terms
        eff = self.effective_B()
        ns = eff.first(cap + 1)
        return ns[:cap], len(ns) > cap

    def with_policy(self, policy: TruncationPolicy) -> "Mtmf":
        return replace(self, policy=policy)

    # evaluation
    def _points(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        elif pts.ndim == 1:
            pts = pts.reshape(1, -1) if self.arity != 1 or pts.size == 1 else pts.reshape(-1, 1)
        if pts.shape[1] != self.arity:
            raise ArityError(f"points have {pts.shape[1]} coordinates, arity is {self.arity}")
        return pts

    def evaluate_many(self, points) -> tuple[np.ndarray, EvalReport]:
        """Values at each row of ``points`` plus a convergence report."""
        pts = self._points(points)
        npts = pts.shape[0]
        ns, more = self.indices()
        finite = self.is_finite
        if not ns:
            return np.zeros(npts), EvalReport(0, True, False, finite, None, npts, npts)
        gvals = field_values(self.g, pts)
        avals = np.empty((len(ns), npts))
        for i, n in enumerate(ns):
            avals[i] = self.a.values(n, pts)
        cs = 0 if finite else self.policy.consecutive_small
        sums, used, done, bad = kernels.series_sum(
            avals, gvals, np.asarray(ns, dtype=np.int64), float(self.policy.abs_tol), cs
        )
        if bad >= 0:
            raise SeriesOverflowError(ns[bad])
        if finite and not more:
            report = EvalReport(len(ns), True, False, True, ns[-1], npts, npts)
        else:
            ok = int(np.count_nonzero(done))
            conv = ok == npts
            report = EvalReport(int(used.max()), conv, not conv, finite, ns[-1], ok, npts)
        return np.asarray(sums), report

    def evaluate(self, x) -> tuple[float, EvalReport]:
        """Value at a single point plus its convergence report."""
        pts = np.asarray(x, dtype=float).reshape(1, -1)
        vals, rep = self.evaluate_many(pts)
        return float(vals[0]), rep

    def __call__(self, x) -> float:
        return self.evaluate(x)[0]

    # symbolic view
    def as_expr(self) -> Expr:
        """``sum a_n g^n / n!`` as one expression (finite symbolic case only)."""
        if not self.is_finite:
            raise ValueError("infinite index set has no closed expression")
        if not (self.a.symbolic and isinstance(self.g, Expr)):
            raise ValueError("numeric coefficients have no closed expression")
        terms = []
        for n in self.effective_B():
            an = self.a.at(n)
            terms.append(Mul((an, Pow(self.g, Const(n)), Const(Fraction(1, math.factorial(n))))))
        return simplify(Add(tuple(terms))) if terms else Const(0)

    def describe(self) -> str:
        g = str(self.g) if isinstance(self.g, Expr) else repr(self.g)
        return f"Mtmf(arity={self.arity}, B={self.B}, a={self.a!r}, g={g})"


# --------------------------------------------------------------------------
# constructors


def trivial_rep(h: Expr | str, arity: int | None = None) -> Mtmf:
    """``B = {1}``, ``a = [0, 1]``, ``g = h`` so the value is exactly ``h``."""
    if isinstance(h, str):
        h = parse(h, arity)
    p = field_arity(h) if arity is None else arity
    return Mtmf(p, IndexSet.finite([1]), ExprList([Const(0), Const(1)]), h)


def constant(c, arity: int = 1) -> Mtmf:
    return trivial_rep(Const(c), arity)


def from_coefficients(coeffs: Sequence, g: Field, B: IndexSet | None = None,
                      arity: int | None = None, policy: TruncationPolicy | None = None) -> Mtmf:
    a = ExprList(coeffs)
    if B is None:
        B = IndexSet.range(a.length - 1)
    p = max(a.required_arity(), field_arity(g)) if arity is None else arity
    return Mtmf(p, B, a, g, policy or TruncationPolicy())


def from_generator(template: Expr | str, g: Field, B: IndexSet, arity: int,
                   policy: TruncationPolicy | None = None, param: str = "n") -> Mtmf:
    if isinstance(template, str):
        template = parse(template, arity, params=(param,))
    return Mtmf(arity, B, ExprGenerator(template, param), g, policy or TruncationPolicy())


def _boxes_overlap(b1, b2) -> bool:
    return all(lo1 < hi2 and lo2 < hi1 for (lo1, hi1), (lo2, hi2) in zip(b1, b2))


def simple_rep(cells: Sequence, constants: Sequence[float]) -> Mtmf:
    """Simple function ``sum_k c_k I_{C_k}`` with ``a_n = n! c_n I_{C_n}``, ``g = 1``.

    Cells are half-open boxes ``[(lo, hi), ...]`` per axis and must be
    pairwise disjoint.
    """
    if len(cells) != len(constants):
        raise ValueError("need one constant per cell")
    if not cells:
        return Mtmf(0, IndexSet.empty(), ExprList([]), Const(1))
    boxes = [tuple((lo, hi) for lo, hi in c) for c in cells]
    p = len(boxes[0])
    if any(len(b) != p for b in boxes):
        raise ArityError("all cells need the same number of axes")
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if _boxes_overlap(boxes[i], boxes[j]):
                raise ValueError(f"cells {i} and {j} overlap")
    coeffs = []
    for n, (box, c) in enumerate(zip(boxes, constants)):
        cn = c if isinstance(c, float) else Fraction(c)
        coeffs.append(Mul((Const(cn * math.factorial(n)), Indicator(box))))
    return Mtmf(p, IndexSet.range(len(boxes) - 1), ExprList(coeffs), Const(1))


def _check_arity(f1: Mtmf, f2: Mtmf) -> None:
    if f1.arity != f2.arity:
        raise ArityError(f"arity mismatch: {f1.arity} vs {f2.arity}")


class _CombinedCoefficients(Coefficients):
    """``s_n = alpha a_{n,1} g1^n + beta a_{n,2} g2^n`` (absent terms are zero)."""

    def __init__(self, alpha, f1: Mtmf, beta, f2: Mtmf):
        self.alpha, self.beta = alpha, beta
        self.f1, self.f2 = f1, f2
        self.B1, self.B2 = f1.effective_B(), f2.effective_B()
        self.symbolic = (f1.a.symbolic and f2.a.symbolic
                         and isinstance(f1.g, Expr) and isinstance(f2.g, Expr))
        self.arity = f1.arity

    def at(self, n: int) -> Field:
        if not self.symbolic:
            return NumericFunction(lambda pts: self.values(n, pts), self.arity, f"s[{n}]")
        parts = []
        if n in self.B1 and self.alpha != 0:
            parts.append(Mul((Const(self.alpha), self.f1.a.at(n), Pow(self.f1.g, Const(n)))))
        if n in self.B2 and self.beta != 0:
            parts.append(Mul((Const(self.beta), self.f2.a.at(n), Pow(self.f2.g, Const(n)))))
        return simplify(Add(tuple(parts))) if parts else Const(0)

    def values(self, n: int, pts: np.ndarray) -> np.ndarray:
        out = np.zeros(pts.shape[0])
        with np.errstate(over="ignore"):
            if n in self.B1 and self.alpha != 0:
                out = out + self.alpha * (self.f1.a.values(n, pts) * field_values(self.f1.g, pts) ** n)
            if n in self.B2 and self.beta != 0:
                out = out + self.beta * (self.f2.a.values(n, pts) * field_values(self.f2.g, pts) ** n)
        return out

    def required_arity(self) -> int:
        return self.arity


def linear_combine(alpha: float, f1: Mtmf, beta: float, f2: Mtmf) -> Mtmf:
    """Canonical combiner: ``g = 1``, ``B = B1 u B2``, ``s_n`` as above."""
    _check_arity(f1, f2)
    B = f1.effective_B().union(f2.effective_B())
    coeffs = _CombinedCoefficients(alpha, f1, beta, f2)
    return Mtmf(f1.arity, B, coeffs, Const(1), f1.policy.merged(f2.policy))


class _ProductCoefficients(Coefficients):
    """``a_{n,1}(x) f2(x)`` with ``f2`` evaluated lazily (memoised per batch)."""

    def __init__(self, f1: Mtmf, f2: Mtmf):
        self.f1, self.f2 = f1, f2
        self.length = f1.a.length
        self.symbolic = False
        self._memo: tuple | None = None

    def _f2(self, pts: np.ndarray) -> np.ndarray:
        key = (pts.shape, pts.tobytes())
        if self._memo is not None and self._memo[0] == key:
            return self._memo[1]
        vals, _ = self.f2.evaluate_many(pts)
        self._memo = (key, vals)
        return vals

    def at(self, n: int) -> Field:
        return NumericFunction(lambda pts: self.values(n, pts), self.f1.arity, f"a1[{n}]*f2")

    def values(self, n: int, pts: np.ndarray) -> np.ndarray:
        return self.f1.a.values(n, pts) * self._f2(pts)

    def required_arity(self) -> int:
        return self.f1.arity


def pointwise_product(f1: Mtmf, f2: Mtmf) -> Mtmf:
    """``B = B1``, ``g = g1``, ``a_n = a_{n,1} * f2`` (deferred coefficient)."""
    _check_arity(f1, f2)
    return Mtmf(f1.arity, f1.B, _ProductCoefficients(f1, f2), f1.g, f1.policy.merged(f2.policy))


# --------------------------------------------------------------------------
# dense simple-function approximation


def dyadic_floor(v: np.ndarray, k: int) -> np.ndarray:
    """Largest multiple of ``2^-k`` not above ``v``."""
    s = float(2 ** k)
    return np.floor(v * s) / s


def quantize(v: np.ndarray, j: int, k: int) -> np.ndarray:
    """Level-set value at resolution ``2^-k`` (clipped to ``+-2^k``), then
    rounded down to a rational with denominator ``2^j``."""
    level = np.clip(dyadic_floor(np.asarray(v, dtype=float), k), -(2.0 ** k), 2.0 ** k)
    return dyadic_floor(level, j)


def approx_simple(f: Mtmf, j: int, k: int, domain: Sequence) -> Mtmf:
    """Simple-function representation ``h_{j,k}`` of ``f`` on a bounding box.

    Each ``a_n`` and ``g`` is replaced by its range quantisation: the value
    set is cut into levels of width ``2^-k`` (magnitudes above ``2^k`` are
    clipped), so every quantised function is constant on finitely many
    measurable level sets, and each level constant is rounded down to a
    dyadic rational with denominator ``2^j``.  The approximation is defined
    on ``domain`` only; querying outside it raises ``ValueError``.
    """
    if j < 0 or k < 0:
        raise ValueError("j and k must be natural numbers")
    box = np.array([(float(lo), float(hi)) for lo, hi in domain])
    if box.shape != (f.arity, 2):
        raise ArityError(f"domain needs {f.arity} axes")

    def inside(pts):
        ok = np.all((pts >= box[:, 0]) & (pts <= box[:, 1]), axis=1)
        if not ok.all():
            bad = pts[np.flatnonzero(~ok)[0]].tolist()
            raise ValueError(f"point {bad} is outside the approximation domain")

    def a_q(n, pts):
        inside(pts)
        return quantize(f.a.values(n, pts), j, k)

    def g_q(pts):
        inside(pts)
        return quantize(field_values(f.g, pts), j, k)

    coeffs = NumericCoefficients(a_q, f.arity, f.a.length, label=f"h_{j},{k}(a)")
    g = NumericFunction(g_q, f.arity, label=f"h_{j},{k}(g)")
    return Mtmf(f.arity, f.B, coeffs, g, f.policy)


# --------------------------------------------------------------------------
# Polish integrability


@dataclass(frozen=True)
class PolishEntry:
    n: int
    value: float
    error: float
    finite: bool


def polish_integrability_check(f: Mtmf, quad: QuadratureSpec, c: float) -> list[PolishEntry]:
    """Per ``n``: the integral of ``(g^n - a_n + c)^2`` over the box."""
    if not c > 0:
        raise ValueError("the integrability constant c must be strictly positive")
    if quad.arity != f.arity:
        raise ArityError("quadrature box and function arity differ")
    out = []
    ns, _ = f.indices()
    for n in ns:
        def integrand(pts, n=n):
            with np.errstate(over="ignore", invalid="ignore"):
                return (field_values(f.g, pts) ** n - f.a.values(n, pts) + c) ** 2

        try:
            res = integrate(integrand, quad)
            finite = bool(res.converged and math.isfinite(res.value))
            out.append(PolishEntry(n, res.value, res.error, finite))
        except (MtmfError, ArithmeticError):
            out.append(PolishEntry(n, math.inf, math.inf, False))
    return out


# --------------------------------------------------------------------------
# problem-file literal


def _var_names(d: Mapping, arity: int) -> dict[str, int]:
    names = {}
    if "vars" in d:
        vs = d["vars"]
        if len(vs) != arity:
            raise ArityError(f"'vars' lists {len(vs)} names for arity {arity}")
        names = {v: i for i, v in enumerate(vs)}
    elif arity == 1:
        names = {"x": 0}
    return names


def mtmf_from_dict(d: Mapping) -> Mtmf:
    """Build an Mtmf from ``{"arity", "B", "a", "g", "trunc"?, "vars"?}``."""
    allowed = {"arity", "B", "a", "g", "trunc", "vars"}
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown MTMF keys: {sorted(unknown)}")
    for key in ("arity", "B", "a", "g"):
        if key not in d:
            raise ValueError(f"MTMF literal is missing {key!r}")
    p = int(d["arity"])
    names = _var_names(d, p)
    B = IndexSet.parse(d["B"])
    g = parse(str(d["g"]), p, names)
    policy = TruncationPolicy.from_dict(d.get("trunc", {}))
    a = d["a"]
    if isinstance(a, list):
        coeffs: Coefficients = ExprList([parse(str(s), p, names) for s in a])
    elif isinstance(a, dict) and set(a) == {"gen"}:
        coeffs = ExprGenerator(parse(str(a["gen"]), p, names, params=("n",)))
    else:
        raise ValueError("'a' must be a list of expressions or {\"gen\": \"...\"}")
    return Mtmf(p, B, coeffs, g, policy)

