"""Lie series: ``exp(c L) g = sum_n c^n L^n g / n!`` as an MTMF.

Operators:

* ``SingleVar``: ``L = f(y) d/dy``; variables ``{y: 0, t: 1}``.
* ``PlanarField``: ``L = d/dx + h(x, y) d/dy``; variables ``{x: 0, y: 1, t: 2}``.

For the first-order problem ``y' = h(x, y)``, ``y(0) = 0`` the flow of the
planar field applied to the coordinate ``y`` gives the Taylor coefficients
``a_n = (L^n y)(0, 0)`` of the solution, computed here in exact arithmetic
when ``h`` is rational.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from .budget import budget
from .errors import ExprError
from .expr import Add, Const, Expr, Mul, Var, diff, evaluate, evaluate_many, parse, simplify, substitute
from .indexset import IndexSet
from .taylor import ExprList, Mtmf, TruncationPolicy

NODE_BUDGET = 100_000
SINGLE_VARS = {"y": 0, "t": 1}
PLANAR_VARS = {"x": 0, "y": 1, "t": 2}


@dataclass(frozen=True)
class LieOperator:
    """``kind = "single"``: ``coeff(y) d/dy``; ``kind = "planar"``: ``d/dx + coeff(x, y) d/dy``."""

    kind: str
    coeff: Expr

    def __post_init__(self):
        if self.kind not in ("single", "planar"):
            raise ValueError("kind must be 'single' or 'planar'")
        allowed = {0} if self.kind == "single" else {0, 1}
        if self.coeff.variables() - allowed:
            names = "y" if self.kind == "single" else "x, y"
            raise ExprError(f"operator coefficient may only depend on {names}")

    @staticmethod
    def single(f: Expr | str) -> "LieOperator":
        return LieOperator("single", parse(f, 2, SINGLE_VARS) if isinstance(f, str) else f)

    @staticmethod
    def planar(h: Expr | str) -> "LieOperator":
        return LieOperator("planar", parse(h, 3, PLANAR_VARS) if isinstance(h, str) else h)

    @property
    def arity(self) -> int:
        return 2 if self.kind == "single" else 3

    @property
    def y_index(self) -> int:
        return 0 if self.kind == "single" else 1

    def apply(self, g: Expr) -> Expr:
        """``L g``, simplified."""
        yi = self.y_index
        term = Mul((self.coeff, diff(g, yi, simplified=False)))
        if self.kind == "planar":
            term = Add((diff(g, 0, simplified=False), term))
        return simplify(term)

    def powers(self, g: Expr, N: int, node_budget: int | None = None) -> tuple[list[Expr], bool]:
        """``[g, L g, ..., L^N g]``; stops early (flag ``True``) when a power
        exceeds the node budget."""
        limit = budget(NODE_BUDGET) if node_budget is None else node_budget
        out = [simplify(g)]
        for _ in range(N):
            nxt = self.apply(out[-1])
            if nxt.size() > limit:
                return out, True
            out.append(nxt)
        return out, False


@dataclass
class LieResult:
    value: float
    mtmf: Mtmf
    terms: int
    budget_exceeded: bool

    def describe(self) -> str:
        tail = " (node budget exceeded: partial sum)" if self.budget_exceeded else ""
        return f"{self.value:.12g} using {self.terms} terms{tail}"


def lie_apply(L: LieOperator, g: Expr | str, c: Expr | str, N: int, point) -> LieResult:
    """``sum_{n<=N} c^n (L^n g) / n!`` at ``point`` plus the MTMF with
    ``B = {0..N}``, ``a_n = L^n g`` and g-slot ``c``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    names = SINGLE_VARS if L.kind == "single" else PLANAR_VARS
    if isinstance(g, str):
        g = parse(g, L.arity, names)
    if isinstance(c, str):
        c = parse(c, L.arity, names)
    point = np.asarray(point, dtype=float).reshape(-1)
    if len(point) != L.arity:
        raise ValueError(f"point needs {L.arity} coordinates")
    powers, exceeded = L.powers(g, N)
    B = IndexSet.range(len(powers) - 1)
    f = Mtmf(L.arity, B, ExprList(powers), c, TruncationPolicy(max_terms=len(powers), abs_tol=0.0,
                                                                 consecutive_small=1))
    value, _ = f.evaluate(point)
    return LieResult(float(value), f, len(powers), exceeded)


# --------------------------------------------------------------------------
# first-order nonlinear ODE


def _exact_at_origin(e: Expr):
    v = simplify(substitute(e, {0: 0, 1: 0}))
    if isinstance(v, Const):
        return v.value
    return float(evaluate(e, (0.0, 0.0)))


@dataclass
class NlodeSolution:
    h: Expr
    coefficients: list  # Fraction / int when exact, else float
    mtmf: Mtmf
    budget_exceeded: bool

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.coefficients)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        vals, _ = self.mtmf.evaluate_many(x.reshape(-1, 1))
        return vals.reshape(x.shape) if x.ndim else float(vals[0])

    def check(self, a: float, b: float, grid: int = 201) -> float:
        """Sup difference against a DOP853 integration of ``y' = h``, ``y(0) = 0``."""
        return check_against_ivp(self, a, b, grid)


def nlode_solve(h: Expr | str, N: int) -> NlodeSolution:
    """Taylor coefficients of ``y' = h(x, y)``, ``y(0) = 0`` through order ``N``.

    ``h`` uses variables ``x`` (index 0) and ``y`` (index 1).
    """
    if N < 1:
        raise ValueError("the truncation order N must be at least 1")
    if isinstance(h, str):
        h = parse(h, 2, {"x": 0, "y": 1})
    if h.variables() - {0, 1}:
        raise ExprError("h may only depend on x and y")
    L = LieOperator("planar", h)
    powers, exceeded = L.powers(Var(1, "y"), N)
    coeffs = [_exact_at_origin(p) for p in powers]
    # a_0 = y(0) = 0, so the sum runs over N+ truncated at the last computed order
    B = IndexSet.finite(range(1, len(coeffs)))
    policy = TruncationPolicy(max_terms=len(coeffs), abs_tol=0.0, consecutive_small=1)
    f = Mtmf(1, B, ExprList([Const(v) for v in coeffs]), Var(0, "x"), policy)
    return NlodeSolution(h, coeffs, f, exceeded)


def check_against_ivp(sol: NlodeSolution, a: float, b: float, grid: int = 201) -> float:
    if not a <= 0.0 <= b:
        raise ValueError("the check interval must contain x = 0")
    xs = np.linspace(a, b, grid)
    h = sol.h

    def rhs(x, y):
        return [float(evaluate_many(h, np.array([[x, y[0]]]))[0])]

    ref = np.zeros_like(xs)
    for end, sel in ((b, xs >= 0), (a, xs < 0)):
        if not sel.any() or end == 0.0:
            continue
        r = solve_ivp(rhs, (0.0, end), [0.0], method="DOP853", rtol=1e-13, atol=1e-14,
                      dense_output=True)
        if not r.success:
            raise RuntimeError(f"reference integration failed: {r.message}")
        ref[sel] = r.sol(xs[sel])[0]
    return float(np.max(np.abs(sol(xs) - ref)))


def taylor_factorial_form(coefficients) -> list:
    """``a_n / n!``: ordinary Taylor coefficients."""
    return [Fraction(v) / math.factorial(n) if isinstance(v, (int, Fraction)) else v / math.factorial(n)
            for n, v in enumerate(coefficients)]


__all__ = [
    "LieOperator", "LieResult", "NlodeSolution", "check_against_ivp",
    "lie_apply", "nlode_solve", "taylor_factorial_form",
]
