"""Derivatives of MTMFs.

Two routes are implemented and cross-checked:

* the shift-operator formulas for the separated form
  ``f(t, x) = sum_{n in B} a_n(t) g(x)^n / n!``, where the first and second
  partials are again MTMFs with shifted coefficients;
* the general Leibniz rule with the multinomial expansion of ``d^l(g^n)``,
  evaluated by the compiled composition kernel.

Variables: ``x1..xp`` are indices ``0..p-1``; the separated form adds
``t`` as index ``p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .budget import budget
from .errors import ArityError, BudgetExceededError, NonDifferentiableError
from .expr import (
    Add,
    Const,
    Expr,
    Indicator,
    Mul,
    Pow,
    diff,
    evaluate_many,
    parse,
    simplify,
)
from .indexset import IndexSet
from .taylor import (
    Coefficients,
    ExprGenerator,
    ExprList,
    Mtmf,
    ShiftedCoefficients,
    TruncationPolicy,
)

COMPOSITION_BUDGET = 1_000_000


def _has_indicator(e: Expr) -> bool:
    return any(isinstance(n, Indicator) for n in e.walk())


# --------------------------------------------------------------------------
# separated form


@dataclass(frozen=True)
class SeparatedMtmf:
    """``a_n`` depend on ``t`` only, ``g`` on ``x`` only.

    The wrapped Mtmf has arity ``p + 1``; ``t`` is the last coordinate.
    """

    f: Mtmf

    def __post_init__(self):
        f = self.f
        if f.arity < 1:
            raise ArityError("the separated form needs at least the t coordinate")
        if not isinstance(f.g, Expr) or not f.a.symbolic:
            raise ValueError("the separated form needs symbolic coefficients and base")
        t = self.t_index
        if t in f.g.variables():
            raise ValueError("g must not depend on t")
        for n in self.sample_indices():
            bad = f.a.at(n).variables() - {t}
            if bad:
                raise ValueError(f"a_{n} depends on x{min(bad) + 1}; only t is allowed")

    @property
    def p(self) -> int:
        return self.f.arity - 1

    @property
    def t_index(self) -> int:
        return self.f.arity - 1

    @property
    def B(self) -> IndexSet:
        return self.f.effective_B()

    def sample_indices(self) -> list[int]:
        ns, _ = self.f.indices()
        return ns

    @staticmethod
    def build(coeffs: Sequence[str] | str, g: str, p: int, N: int | None = None,
              policy: TruncationPolicy | None = None) -> "SeparatedMtmf":
        """From text: ``coeffs`` is a list (``a_0, a_1, ...``) or a generator
        in ``n``; expressions use ``t`` and ``x1..xp`` (or ``x`` when p=1)."""
        names = {"t": p}
        if p == 1:
            names["x"] = 0
        gx = parse(g, p + 1, names)
        if isinstance(coeffs, str):
            a: Coefficients = ExprGenerator(parse(coeffs, p + 1, names, params=("n",)))
            if N is None:
                raise ValueError("a generator needs an explicit N")
        else:
            a = ExprList([parse(c, p + 1, names) for c in coeffs])
            N = len(coeffs) - 1 if N is None else N
        return SeparatedMtmf(Mtmf(p + 1, IndexSet.range(N), a, gx, policy or TruncationPolicy()))


def shift(a: Coefficients, n: int) -> Coefficients:
    """``tau^n``: the family ``l -> a_{l+n}``; ``tau^0`` is the identity."""
    if n == 0:
        return a
    if isinstance(a, ShiftedCoefficients):
        return ShiftedCoefficients(a.base, a.k + n)
    return ShiftedCoefficients(a, n)


def shift_indexset(B: IndexSet, n: int) -> IndexSet:
    return B.shift(n)


class _FieldScaled(Coefficients):
    """``sum_i factor_i * base_i`` over shifted families, symbolic."""

    symbolic = True

    def __init__(self, parts: Sequence[tuple[Expr, Coefficients, IndexSet]], arity: int):
        self.parts = tuple(parts)
        self.arity = arity
        self._cache: dict[int, Expr] = {}

    def at(self, n: int) -> Expr:
        e = self._cache.get(n)
        if e is None:
            terms = [Mul((factor, a.at(n))) for factor, a, B in self.parts if n in B]
            e = simplify(Add(tuple(terms))) if terms else Const(0)
            self._cache[n] = e
        return e

    def required_arity(self) -> int:
        return self.arity


def _axis_check(f: SeparatedMtmf, *axes: int) -> None:
    for i in axes:
        if not 0 <= i < f.p:
            raise ArityError(f"axis {i} outside 0..{f.p - 1}")
    if _has_indicator(f.f.g):
        raise NonDifferentiableError("g contains an indicator")


def d1_separated(f: SeparatedMtmf, i: int) -> Mtmf:
    """``g_{x_i} * T_{g, tau a}(B - 1)``."""
    _axis_check(f, i)
    gi = diff(f.f.g, i)
    B1 = f.B.shift(1)
    a = _FieldScaled([(gi, shift(f.f.a, 1), B1)], f.f.arity)
    return Mtmf(f.f.arity, B1, a, f.f.g, f.f.policy)


def d2_separated(f: SeparatedMtmf, i: int, j: int) -> Mtmf:
    """``g_{x_i x_j} T_{g, tau a}(B-1) + g_{x_i} g_{x_j} T_{g, tau^2 a}(B-2)``."""
    _axis_check(f, i, j)
    g = f.f.g
    gij = diff(diff(g, i), j) if i <= j else diff(diff(g, j), i)
    gigj = simplify(Mul((diff(g, i), diff(g, j))))
    B1, B2 = f.B.shift(1), f.B.shift(2)
    a = _FieldScaled([(gij, shift(f.f.a, 1), B1), (gigj, shift(f.f.a, 2), B2)], f.f.arity)
    return Mtmf(f.f.arity, B1.union(B2), a, g, f.f.policy)


# --------------------------------------------------------------------------
# general k-th derivative


class DerivativeEvaluator:
    """``d^k f / dx_j^k`` of a (truncated) MTMF with symbolic ``a_n`` and ``g``.

    Assembled from the Leibniz rule; ``d^l(g^n)`` is the multinomial sum
    over weak compositions ``l_1 + ... + l_n = l`` computed by
    :func:`mtmf.kernels.power_derivative`.  Infinite ``B`` is truncated at
    the policy's ``max_terms`` (``truncated`` is then set).
    """

    def __init__(self, f: Mtmf, j: int, k: int, budget_limit: int | None = None):
        if k < 0:
            raise ValueError("derivative order must be natural")
        if not 0 <= j < f.arity:
            raise ArityError(f"axis {j} outside 0..{f.arity - 1}")
        if not isinstance(f.g, Expr) or not f.a.symbolic:
            raise ValueError("dk_general needs symbolic coefficients and base")
        if k > 0 and _has_indicator(f.g):
            raise NonDifferentiableError("g contains an indicator")
        self.f, self.j, self.k = f, j, k
        self.ns, self.truncated = f.indices()
        limit = budget(COMPOSITION_BUDGET) if budget_limit is None else budget_limit
        work = sum(kernels.count_compositions(l, n) for n in self.ns for l in range(k + 1))
        if work > limit:
            raise BudgetExceededError(
                f"derivative order {k} over n <= {max(self.ns, default=0)} needs {work} "
                f"composition terms, budget is {limit}"
            )
        self.compositions = work
        self.g_derivs = [f.g]
        for _ in range(k):
            self.g_derivs.append(diff(self.g_derivs[-1], j))
        self.a_derivs: list[list[Expr]] = []
        for n in self.ns:
            row = [f.a.at(n)]
            for _ in range(k):
                row.append(diff(row[-1], j))
            self.a_derivs.append(row)

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.f.arity:
            raise ArityError(f"points need {self.f.arity} coordinates")
        D = np.array([evaluate_many(e, pts) for e in self.g_derivs])
        k = self.k
        total = np.zeros(pts.shape[0])
        inv_fact = 1.0
        m = 0
        for n, row in zip(self.ns, self.a_derivs):
            while m < n:
                m += 1
                inv_fact /= m
            acc = np.zeros(pts.shape[0])
            for l in range(k + 1):
                ad = row[k - l]
                if ad == Const(0):
                    continue
                pd = kernels.power_derivative(D[: l + 1], n, l)
                acc = acc + math.comb(k, l) * evaluate_many(ad, pts) * pd
            total = total + acc * inv_fact
        return total

    def value(self, x) -> float:
        return float(self(np.asarray(x, dtype=float).reshape(1, -1))[0])

    def primitive(self) -> "DerivativeEvaluator":
        """The same truncated sum, differentiated zero times."""
        return DerivativeEvaluator(self.f, self.j, 0)


def dk_general(f: Mtmf, j: int, k: int, budget_limit: int | None = None) -> DerivativeEvaluator:
    return DerivativeEvaluator(f, j, k, budget_limit)


# --------------------------------------------------------------------------
# the k-th order ODE identity


def _y_expr(f: SeparatedMtmf) -> Expr:
    """``y = T_{g, tau a}(B_{N-1})`` as an expression."""
    g = f.f.g
    terms = []
    for m in f.B.shift(1):
        terms.append(Mul((f.f.a.at(m + 1), Pow(g, Const(m)), Const(Fraction(1, math.factorial(m))))))
    return simplify(Add(tuple(terms))) if terms else Const(0)


def residual_kth_ode(f: SeparatedMtmf, i: int, k: int, grid) -> np.ndarray:
    """``LHS - RHS`` of the k-th order identity at each grid point.

    LHS: ``sum_{n<=k} C(k,n) d^{k-n+1} g * d^n y`` with
    ``y = T_{g, tau a}(B_{N-1})``.  RHS: ``d^{k+1} f`` written as
    ``sum_n a_n(t)/n! d^{k+1}(g^n)`` (multinomial route).
    """
    _axis_check(f, i)
    if not f.B.is_finite:
        raise ValueError("the identity is checked on a finite B_N")
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    g = f.f.g
    y = _y_expr(f)
    lhs = np.zeros(pts.shape[0])
    gd = g
    g_derivs = [g]
    for _ in range(k + 1):
        gd = diff(gd, i)
        g_derivs.append(gd)
    yd = y
    for n in range(k + 1):
        lhs = lhs + math.comb(k, n) * evaluate_many(g_derivs[k - n + 1], pts) * evaluate_many(yd, pts)
        if n < k:
            yd = diff(yd, i)
    rhs = DerivativeEvaluator(f.f, i, k + 1)(pts)
    return lhs - rhs


# --------------------------------------------------------------------------
# finite-difference cross-check

_STENCILS = {
    1: (1e-4, [1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]),
    2: (1e-4, [-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]),
    3: (1e-2, [1 / 8, -1.0, 13 / 8, 0.0, -13 / 8, 1.0, -1 / 8]),
    4: (1e-2, [-1 / 6, 2.0, -13 / 2, 28 / 3, -13 / 2, 2.0, -1 / 6]),
}


def finite_difference(fn: Callable[[np.ndarray], np.ndarray], x, j: int, k: int,
                      h: float | None = None) -> float:
    """Fourth-order central difference of order ``k <= 4`` along axis ``j``."""
    if k not in _STENCILS:
        raise ValueError("finite-difference stencils exist for orders 1..4")
    step, w = _STENCILS[k]
    h = step if h is None else h
    x = np.asarray(x, dtype=float).reshape(-1)
    r = len(w) // 2
    pts = np.repeat(x[None, :], len(w), axis=0)
    pts[:, j] += h * np.arange(-r, r + 1)
    v = np.asarray(fn(pts), dtype=float)
    if k % 2:
        # antisymmetric: pair the mirrored nodes so the centre cancels exactly
        s = math.fsum(w[r + q] * (v[r + q] - v[r - q]) for q in range(1, r + 1))
    else:
        s = math.fsum(w[r + q] * ((v[r + q] - v[r]) + (v[r - q] - v[r])) for q in range(1, r + 1))
    return s / h ** k


def fd_check(evaluator: DerivativeEvaluator, x, j: int | None = None, k: int | None = None) -> float:
    """Relative deviation ``|D - FD| / max(1, |FD|)`` at ``x``."""
    j = evaluator.j if j is None else j
    k = evaluator.k if k is None else k
    if (j, k) != (evaluator.j, evaluator.k):
        raise ValueError("axis/order differ from the evaluator's")
    if k == 0:
        return 0.0
    exact = evaluator.value(x)
    fd = finite_difference(evaluator.primitive(), x, j, k)
    return abs(exact - fd) / max(1.0, abs(fd))

