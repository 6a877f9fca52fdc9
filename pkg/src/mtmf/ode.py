"""Linear ODE boundary problems solved as MTMFs by variation of parameters.

Problem: ``L_m[y] = sum_{n in B} h_n(x) h_g(x)^n / n!`` on ``[a, b]`` with
``C_j[y] = sum_k M_jk y^(k-1)(a) + N_jk y^(k-1)(b) = 0``.

For every ``n`` the per-term equation ``L_m[y_n] = h_n h_g^n`` gets the
particular solution

    z_0n(x) = sum_k z_k(x) int_{x0}^x (W_k/W)(t) h_n(t) h_g(t)^n / p_m(t) dt

from a homogeneous basis ``z_1..z_m`` with canonical unit data at ``x0``.
The general solution is ``sum_n (z_0n + sum_i c_i z_i) / n!`` with the
constants fixed by the boundary conditions.  Derivatives up to order
``m - 1`` follow from the variation-of-parameters identity
``y^(r) = sum_k z_k^(r) I_k``; order ``m`` adds ``h_n h_g^n / p_m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    ArityError,
    ExprDomainError,
    QuadratureError,
    RecoveryError,
    SingularSystemError,
)
from .expr import Const, Expr, diff, evaluate_many, parse
from .indexset import IndexSet
from .quadrature import cumulative_integral
from .taylor import (
    Coefficients,
    ExprGenerator,
    ExprList,
    Mtmf,
    NumericCoefficients,
    TruncationPolicy,
)

FLAVORS = ("static", "spacetime", "pde_t")
EQUATION_GATE = 1e-6
BOUNDARY_GATE = 1e-8
RECOVERY_GATE = 1e-5
COND_LIMIT = 1e12
WRONSKIAN_FLOOR = 1e-12


def _col(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1, 1)


# --------------------------------------------------------------------------
# problem


@dataclass(eq=False)
class LodeProblem:
    """``L_m[y] = h``, ``C[y] = 0`` with ``h`` in MTMF form.

    ``p`` lists ``p_0 .. p_m`` as expressions in ``x`` (variable index 0).
    For the time flavours the ``h_n`` are expressions in ``t`` (index 1).
    """

    m: int
    p: tuple
    interval: tuple
    B: IndexSet
    h: Coefficients
    h_g: Expr
    M: np.ndarray
    N: np.ndarray
    x0: float | None = None
    flavor: str = "static"
    policy: TruncationPolicy = field(default_factory=lambda: TruncationPolicy(max_terms=40))
    basis: tuple | None = None
    u: object = "default"
    times: tuple = ()

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("order m must be at least 1")
        self.p = tuple(self.p)
        if len(self.p) != self.m + 1:
            raise ValueError(f"need m + 1 = {self.m + 1} coefficients p_0..p_m, got {len(self.p)}")
        a, b = (float(v) for v in self.interval)
        if not a < b:
            raise ValueError("interval needs a < b")
        self.interval = (a, b)
        self.x0 = a if self.x0 is None else float(self.x0)
        if not a <= self.x0 <= b:
            raise ValueError(f"x0 = {self.x0} lies outside [{a}, {b}]")
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        self.M = np.asarray(self.M, dtype=float).reshape(self.m, self.m)
        self.N = np.asarray(self.N, dtype=float).reshape(self.m, self.m)
        for e in self.p + (self.h_g,):
            if e.variables() - {0}:
                raise ArityError(f"{e} may only depend on x")
        grid = np.linspace(a, b, 1001)
        try:
            pm = evaluate_many(self.p[-1], _col(grid))
        except ExprDomainError as exc:
            raise ValueError(f"p_m is undefined on the interval: {exc}") from exc
        if np.any(pm == 0) or np.any(np.sign(pm) != np.sign(pm[0])):
            bad = grid[np.argmin(np.abs(pm))]
            raise ValueError(f"p_m vanishes on the interval (near x = {bad:.6g})")
        if self.basis is not None:
            self.basis = tuple(self.basis)
            if len(self.basis) != self.m:
                raise ValueError(f"a user basis needs {self.m} functions")

    @property
    def time_dependent(self) -> bool:
        return self.flavor != "static"

    @property
    def coeff_arity(self) -> int:
        return 2 if self.time_dependent else 1

    def indices(self) -> tuple[list[int], bool]:
        eff = self.B
        if self.h.length is not None:
            eff = eff.intersect(IndexSet.range(self.h.length - 1))
        ns = eff.first(self.policy.max_terms + 1)
        return ns[: self.policy.max_terms], len(ns) > self.policy.max_terms

    def h_values(self, n: int, xs: np.ndarray, t: float = 0.0) -> np.ndarray:
        """``h_n(x) h_g(x)^n`` (static) at the nodes ``xs``."""
        xs = np.asarray(xs, dtype=float)
        pts = _col(xs) if not self.time_dependent else np.column_stack([xs, np.full(len(xs), t)])
        hn = self.h.values(n, pts)
        return hn * evaluate_many(self.h_g, _col(xs)) ** n

    def rhs(self, xs, ns: Sequence[int] | None = None) -> np.ndarray:
        """``sum_n h_n h_g^n / n!`` over the solved indices."""
        ns = self.indices()[0] if ns is None else ns
        xs = np.asarray(xs, dtype=float)
        out = np.zeros(len(xs))
        for n in ns:
            out = out + self.h_values(n, xs) / math.factorial(n)
        return out

    @staticmethod
    def from_dict(d: Mapping) -> "LodeProblem":
        allowed = {"m", "p", "interval", "B", "h_n", "h_g", "M", "N", "x0", "flavor",
                   "trunc", "basis", "u", "t"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown problem keys: {sorted(unknown)}")
        for key in ("m", "p", "interval", "B", "h_n", "h_g", "M", "N"):
            if key not in d:
                raise ValueError(f"problem file is missing {key!r}")
        flavor = d.get("flavor", "static")
        m = int(d["m"])
        xnames = {"x": 0}
        p = [parse(str(s), 1, xnames) for s in d["p"]]
        hg = parse(str(d["h_g"]), 1, xnames)
        if flavor == "static":
            hnames, harity = xnames, 1
        else:
            hnames, harity = {"x": 0, "t": 1}, 2
        hn = d["h_n"]
        if isinstance(hn, list):
            h: Coefficients = ExprList([parse(str(s), harity, hnames) for s in hn])
        elif isinstance(hn, dict) and set(hn) == {"gen"}:
            h = ExprGenerator(parse(str(hn["gen"]), harity, hnames, params=("n",)))
        else:
            raise ValueError("'h_n' must be a list of expressions or {\"gen\": \"...\"}")
        basis = None
        if "basis" in d:
            basis = [parse(str(s), 1, xnames) for s in d["basis"]]
        policy = TruncationPolicy.from_dict(d["trunc"]) if "trunc" in d else TruncationPolicy(max_terms=40)
        times = d.get("t", [])
        times = tuple(float(v) for v in (times if isinstance(times, list) else [times]))
        return LodeProblem(
            m=m, p=tuple(p), interval=tuple(d["interval"]), B=IndexSet.parse(str(d["B"])),
            h=h, h_g=hg, M=np.array(d["M"], dtype=float), N=np.array(d["N"], dtype=float),
            x0=d.get("x0"), flavor=flavor, policy=policy, basis=basis, u=d.get("u", "default"),
            times=times,
        )


# --------------------------------------------------------------------------
# homogeneous basis and Wronskians


class Basis:
    """Fundamental system ``Phi[r, k] = z_k^(r)`` on ``[a, b]``.

    Numerically: DOP853 on the companion system with ``Phi(x0) = I``
    (dense output, ``rtol = atol = 1e-13``).  A user basis is differentiated
    symbolically instead.
    """

    def __init__(self, prob: LodeProblem, rtol: float = 1e-13, atol: float = 1e-13):
        self.prob = prob
        self.m = prob.m
        a, b = prob.interval
        self.a, self.b, self.x0 = a, b, prob.x0
        self.symbolic = prob.basis is not None
        if self.symbolic:
            self.exprs = []
            for z in prob.basis:
                row = [z]
                for _ in range(self.m):
                    row.append(diff(row[-1], 0))
                self.exprs.append(row)
            self.segments = []
            return
        m = self.m
        p = prob.p

        def rhs(x, y):
            Y = y.reshape(m, m)
            xv = np.array([[x]])
            pm = evaluate_many(p[m], xv)[0]
            dY = np.empty_like(Y)
            dY[:-1] = Y[1:]
            dY[-1] = -sum(evaluate_many(p[r], xv)[0] / pm * Y[r] for r in range(m))
            return dY.reshape(-1)

        y0 = np.eye(m).reshape(-1)
        self.segments = []
        for end in (a, b):
            if end == self.x0:
                continue
            sol = solve_ivp(rhs, (self.x0, end), y0, method="DOP853", rtol=rtol, atol=atol,
                            dense_output=True)
            if not sol.success:
                raise RuntimeError(f"basis integration failed: {sol.message}")
            self.segments.append((min(self.x0, end), max(self.x0, end), sol.sol))

    def _check(self, xs: np.ndarray) -> None:
        slack = 1e-12 * (self.b - self.a)
        if np.any(xs < self.a - slack) or np.any(xs > self.b + slack):
            raise ValueError(f"points outside [{self.a}, {self.b}]")

    def state(self, xs) -> np.ndarray:
        """``(npts, m, m)`` array of ``z_k^(r)(x)`` for ``r < m``."""
        xs = np.asarray(xs, dtype=float).reshape(-1)
        self._check(xs)
        m = self.m
        if self.symbolic:
            out = np.empty((len(xs), m, m))
            for k in range(m):
                for r in range(m):
                    out[:, r, k] = evaluate_many(self.exprs[k][r], _col(xs))
            return out
        out = np.empty((len(xs), m, m))
        done = np.zeros(len(xs), dtype=bool)
        for lo, hi, sol in self.segments:
            sel = (xs >= lo) & (xs <= hi) & ~done
            if sel.any():
                out[sel] = sol(np.clip(xs[sel], lo, hi)).T.reshape(-1, m, m)
                done |= sel
        rest = ~done
        if rest.any():  # x0 only, or rounding at the ends
            out[rest] = np.eye(m)
        return out

    def derivative(self, xs, r: int) -> np.ndarray:
        """``(npts, m)`` array of ``z_k^(r)`` for ``0 <= r <= m``."""
        xs = np.asarray(xs, dtype=float).reshape(-1)
        if r < self.m:
            return self.state(xs)[:, r, :]
        if r != self.m:
            raise ValueError("derivatives above order m are not provided")
        if self.symbolic:
            return np.column_stack([evaluate_many(self.exprs[k][self.m], _col(xs)) for k in range(self.m)])
        S = self.state(xs)
        pm = evaluate_many(self.prob.p[self.m], _col(xs))
        acc = np.zeros((len(xs), self.m))
        for q in range(self.m):
            acc -= (evaluate_many(self.prob.p[q], _col(xs)) / pm)[:, None] * S[:, q, :]
        return acc

    def ratios(self, ts) -> np.ndarray:
        """``W_k / W`` at each node, shape ``(npts, m)`` (Cramer's rule)."""
        S = self.state(ts)
        W = np.linalg.det(S)
        if np.any(np.abs(W) < WRONSKIAN_FLOOR):
            i = int(np.argmin(np.abs(W)))
            raise SingularSystemError(
                f"Wronskian {W[i]:.3e} at x = {np.ravel(ts)[i]:.6g}: basis is linearly dependent")
        e = np.zeros((len(W), self.m, 1))
        e[:, -1, 0] = 1.0
        return np.linalg.solve(S, e)[:, :, 0]


def homogeneous_basis(prob: LodeProblem) -> Basis:
    return Basis(prob)


def wronskian(basis: Basis, t) -> np.ndarray | float:
    """``det [z_k^(r)(t)]``."""
    scalar = np.ndim(t) == 0
    W = np.linalg.det(basis.state(t))
    return float(W[0]) if scalar else W


def wronskian_k(basis: Basis, k: int, t) -> np.ndarray | float:
    """Wronskian with column ``k`` (0-based) replaced by ``(0, ..., 0, 1)``."""
    scalar = np.ndim(t) == 0
    S = basis.state(t).copy()
    S[:, :, k] = 0.0
    S[:, -1, k] = 1.0
    W = np.linalg.det(S)
    return float(W[0]) if scalar else W


# --------------------------------------------------------------------------
# particular solutions


class ParticularSolution:
    """``z_0n`` for one right-hand side ``f(x) = rhs(x) / p_m(x)``."""

    def __init__(self, basis: Basis, rhs, label: str = "", zero: bool = False,
                 abs_tol: float = 1e-13, rel_tol: float = 1e-12):
        self.basis = basis
        self.rhs = rhs
        self.label = label
        self.zero = zero
        self.abs_tol, self.rel_tol = abs_tol, rel_tol
        self.error = 0.0
        self._memo: tuple | None = None

    def forcing(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float).reshape(-1)
        pm = evaluate_many(self.basis.prob.p[-1], _col(ts))
        return self.rhs(ts) / pm

    def integrals(self, xs) -> np.ndarray:
        """``I_k(x) = int_{x0}^x (W_k/W) f dt``, shape ``(npts, m)``."""
        xs = np.asarray(xs, dtype=float).reshape(-1)
        if self.zero:
            return np.zeros((len(xs), self.basis.m))
        key = xs.tobytes()
        if self._memo is not None and self._memo[0] == key:
            return self._memo[1]

        def integrand(ts):
            return self.basis.ratios(ts) * self.forcing(ts)[:, None]

        vals, err = cumulative_integral(integrand, xs, self.basis.x0, self.abs_tol, self.rel_tol)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError(f"{self.label}: u_k integrals are not finite (integrability fails)")
        self.error = max(self.error, err)
        self._memo = (key, vals)
        return vals

    def values(self, xs, r: int = 0) -> np.ndarray:
        """``z_0n^(r)(x)`` for ``r <= m``."""
        xs = np.asarray(xs, dtype=float).reshape(-1)
        if self.zero:
            return np.zeros(len(xs))
        out = np.sum(self.basis.derivative(xs, r) * self.integrals(xs), axis=1)
        if r == self.basis.m:
            out = out + self.forcing(xs)
        return out


def _piece(basis: Basis, prob: LodeProblem, n: int, weight_free: bool = False) -> ParticularSolution:
    """Per-``n`` particular solution; ``weight_free`` drops ``h_n`` (time flavours)."""
    if weight_free:
        rhs = lambda ts: evaluate_many(prob.h_g, _col(ts)) ** n  # noqa: E731
        return ParticularSolution(basis, rhs, f"n={n}")
    zero = False
    if prob.h.symbolic and isinstance(prob.h.at(n), Expr):
        zero = prob.h.at(n) == Const(0)
    return ParticularSolution(basis, lambda ts: prob.h_values(n, ts), f"n={n}", zero=zero)


def particular_solution(prob: LodeProblem, n: int, basis: Basis | None = None) -> ParticularSolution:
    return _piece(basis or Basis(prob), prob, n)


# --------------------------------------------------------------------------
# general solution


def boundary_apply(prob: LodeProblem, at_a: np.ndarray, at_b: np.ndarray) -> np.ndarray:
    """``C[y]`` from derivative vectors ``(y, y', ..., y^(m-1))`` at ``a`` and ``b``."""
    return prob.M @ at_a + prob.N @ at_b


def _boundary_matrix(prob: LodeProblem, basis: Basis) -> np.ndarray:
    a, b = prob.interval
    S = basis.state([a, b])
    return prob.M @ S[0] + prob.N @ S[1]


def _solve_constants(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystemError(
            f"boundary system is singular (condition number {cond:.3e})", cond)
    return np.linalg.solve(A, rhs)


@dataclass
class ResidualReport:
    equation: float
    boundary: np.ndarray
    derivative_consistency: float
    grid: np.ndarray

    @property
    def passed(self) -> bool:
        return (self.equation <= EQUATION_GATE and self.derivative_consistency <= EQUATION_GATE
                and float(np.max(np.abs(self.boundary), initial=0.0)) <= BOUNDARY_GATE)

    def describe(self) -> str:
        bmax = float(np.max(np.abs(self.boundary), initial=0.0))
        state = "PASS" if self.passed else "FAIL"
        return (f"{state}: equation residual {self.equation:.3e} (gate {EQUATION_GATE:g}), "
                f"boundary residual {bmax:.3e} (gate {BOUNDARY_GATE:g}), "
                f"derivative consistency {self.derivative_consistency:.3e}")


def _fd_first(values_fn, xs: np.ndarray, a: float, b: float, h: float) -> np.ndarray:
    """Fourth-order first derivative; one-sided five-point stencils near the ends."""
    xs = np.asarray(xs, dtype=float)
    central = (xs - 2 * h >= a) & (xs + 2 * h <= b)
    forward = ~central & (xs + 4 * h <= b)
    backward = ~central & ~forward
    offs = np.arange(-4, 5)
    pts = (xs[:, None] + h * offs[None, :])
    pts = np.clip(pts, a, b)
    v = values_fn(pts.reshape(-1)).reshape(len(xs), len(offs))
    c = 4  # index of offset 0
    out = np.empty(len(xs))
    cw = np.array([1, -8, 0, 8, -1]) / 12.0
    fw = np.array([-25, 48, -36, 16, -3]) / 12.0
    out[central] = (v[central][:, c - 2:c + 3] @ cw) / h
    out[forward] = (v[forward][:, c:c + 5] @ fw) / h
    out[backward] = -(v[backward][:, c - 4:c + 1][:, ::-1] @ fw) / h
    return out


class LodeSolution:
    """General solution ``sum_n (z_0n + sum_i c_i z_i) / n!``."""

    def __init__(self, prob: LodeProblem, basis: Basis, ns: list[int],
                 pieces: dict[int, ParticularSolution], c: np.ndarray, truncated: bool,
                 condition: float):
        self.prob = prob
        self.basis = basis
        self.ns = ns
        self.pieces = pieces
        self.c = c
        self.truncated = truncated
        self.condition = condition
        self.S = math.fsum(1.0 / math.factorial(n) for n in ns)
        self._report: ResidualReport | None = None

    def z(self, n: int, xs, r: int = 0) -> np.ndarray:
        """``z_n^(r) = z_0n^(r) + sum_i c_i z_i^(r)`` (equals ``y_n = a_n g^n``)."""
        xs = np.asarray(xs, dtype=float).reshape(-1)
        return self.pieces[n].values(xs, r) + self.basis.derivative(xs, r) @ self.c

    def particular(self, xs, r: int = 0) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).reshape(-1)
        out = np.zeros(len(xs))
        for n in self.ns:
            out = out + self.pieces[n].values(xs, r) / math.factorial(n)
        return out

    def y(self, xs, r: int = 0) -> np.ndarray:
        """``y^(r)`` for ``r <= m``."""
        xs = np.asarray(xs, dtype=float).reshape(-1)
        return self.particular(xs, r) + self.S * (self.basis.derivative(xs, r) @ self.c)

    def __call__(self, x) -> float | np.ndarray:
        scalar = np.ndim(x) == 0
        v = self.y(np.atleast_1d(x))
        return float(v[0]) if scalar else v

    def as_mtmf(self) -> Mtmf:
        """``T_{1, z}(B)``: ``a_n = z_n`` (numeric), ``g = 1``."""
        coeffs = NumericCoefficients(lambda n, pts: self.z(n, pts[:, 0]), 1, label="z_n")
        return Mtmf(1, IndexSet.finite(self.ns), coeffs, Const(1), self.prob.policy)

    def boundary_residuals(self) -> np.ndarray:
        a, b = self.prob.interval
        m = self.prob.m
        at_a = np.array([self.y([a], r)[0] for r in range(m)])
        at_b = np.array([self.y([b], r)[0] for r in range(m)])
        return boundary_apply(self.prob, at_a, at_b)

    def residuals(self, grid: int = 201) -> ResidualReport:
        """Equation residual on a uniform grid with ``y^(m)`` taken as a
        finite difference of the assembled ``y^(m-1)``."""
        prob = self.prob
        a, b = prob.interval
        m = prob.m
        xs = np.linspace(a, b, grid)
        h = 1e-4 * (b - a)
        ym = _fd_first(lambda q: self.y(q, m - 1), xs, a, b, h)
        lhs = evaluate_many(prob.p[m], _col(xs)) * ym
        for r in range(m):
            lhs = lhs + evaluate_many(prob.p[r], _col(xs)) * self.y(xs, r)
        eq = float(np.max(np.abs(lhs - prob.rhs(xs, self.ns))))
        cons = 0.0
        for r in range(m - 1):
            fd = _fd_first(lambda q, r=r: self.y(q, r), xs, a, b, h)
            cons = max(cons, float(np.max(np.abs(fd - self.y(xs, r + 1)))))
        return ResidualReport(eq, self.boundary_residuals(), cons, xs)

    def report(self, grid: int = 201) -> ResidualReport:
        if self._report is None or len(self._report.grid) != grid:
            self._report = self.residuals(grid)
        return self._report


def _select_terms(prob: LodeProblem, basis: Basis, weight_free: bool = False):
    ns_all, more = prob.indices()
    finite = prob.B.is_finite and not more
    a, b = prob.interval
    probe = np.linspace(a, b, 33)
    ns, pieces = [], {}
    small = 0
    for n in ns_all:
        pc = _piece(basis, prob, n, weight_free)
        pieces[n] = pc
        ns.append(n)
        if not finite:
            size = float(np.max(np.abs(pc.values(probe)))) / math.factorial(n)
            size = max(size, float(np.max(np.abs(prob.h_values(n, probe)))) / math.factorial(n)) \
                if not weight_free else size
            small = small + 1 if size < prob.policy.abs_tol else 0
            if small >= prob.policy.consecutive_small:
                return ns, pieces, False
    return ns, pieces, not finite


def general_solution(prob: LodeProblem, basis: Basis | None = None) -> LodeSolution:
    """Solve ``L_m[y] = h``, ``C[y] = 0``; constants from the boundary system."""
    basis = basis or Basis(prob)
    ns, pieces, truncated = _select_terms(prob, basis)
    a, b = prob.interval
    m = prob.m
    A = _boundary_matrix(prob, basis)
    cond = float(np.linalg.cond(A))
    part_a = np.zeros(m)
    part_b = np.zeros(m)
    for n in ns:
        w = 1.0 / math.factorial(n)
        part_a += w * np.array([pieces[n].values([a], r)[0] for r in range(m)])
        part_b += w * np.array([pieces[n].values([b], r)[0] for r in range(m)])
    S = math.fsum(1.0 / math.factorial(n) for n in ns)
    if S == 0:
        c = np.zeros(m)
    else:
        c = _solve_constants(A, -boundary_apply(prob, part_a, part_b)) / S
    return LodeSolution(prob, basis, ns, pieces, c, truncated, cond)


# --------------------------------------------------------------------------
# Green's kernel and coefficient recovery


def greens_kernel(sol: LodeSolution, n: int, x: float, t) -> np.ndarray | float:
    """``w_{n,m}(x, t) = sum_k z_k(x) [W_k(t)/(p_m(t) W(t)) + c_k/((x-x0) h_n(t) h_g(t)^n)]``."""
    prob = sol.prob
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if x == prob.x0:
        raise ValueError("the kernel's constant term is singular at x = x0")
    zx = sol.basis.derivative([x], 0)[0]
    pm = evaluate_many(prob.p[-1], _col(ts))
    first = sol.basis.ratios(ts) / pm[:, None]
    out = first @ zx
    if np.any(sol.c != 0):
        hh = prob.h_values(n, ts)
        if np.any(hh == 0):
            i = int(np.flatnonzero(hh == 0)[0])
            raise RecoveryError(f"h_n(t) h_g(t)^n vanishes at t = {ts[i]:.6g}")
        out = out + (zx @ sol.c) / ((x - prob.x0) * hh)
    return float(out[0]) if scalar else out


def greens_reconstruct(sol: LodeSolution, n: int, x: float) -> float:
    """``int_{x0}^x w_{n,m}(x, t) h_n(t) h_g(t)^n dt`` (should equal ``z_n(x)``)."""
    prob = sol.prob
    vals, _ = cumulative_integral(lambda ts: greens_kernel(sol, n, x, ts) * prob.h_values(n, ts),
                                  np.array([x]), prob.x0)
    return float(vals[0])


@dataclass
class Recovery:
    g: Expr
    a: NumericCoefficients
    u: dict
    consistency: float
    sign_mismatch: bool
    grid: np.ndarray

    @property
    def passed(self) -> bool:
        return self.consistency <= RECOVERY_GATE

    def as_mtmf(self, ns: Sequence[int], policy: TruncationPolicy) -> Mtmf:
        return Mtmf(1, IndexSet.finite(ns), self.a, self.g, policy)


def recover_representation(sol: LodeSolution, u="default", grid: int = 201) -> Recovery:
    """``g := h_g`` and ``a_n`` from the first-order equation
    ``a_n' + n (g'/g) a_n = q_n`` with ``q_n = y_n' / g^n``:

        a_n(x) = (g(x0)/g(x))^n [u_n + int_{x0}^x (g(t)/g(x0))^n q_n(t) dt]

    ``u = "default"`` takes ``u_n = y_n(x0) / g(x0)^n`` (so that
    ``a_n g^n = y_n``); ``"zero"`` takes ``u_n = 0``; a sequence or mapping
    supplies ``u_n`` directly.
    """
    prob = sol.prob
    g = prob.h_g
    a, b = prob.interval
    probe = np.linspace(a, b, 1001)
    gv = evaluate_many(g, _col(probe))
    if np.any(gv == 0) or np.any(np.sign(gv) != np.sign(gv[0])):
        i = int(np.argmin(np.abs(gv)))
        raise RecoveryError(f"h_g has a zero crossing near x = {probe[i]:.6g}; recovery refused")
    x0 = prob.x0
    g0 = float(evaluate_many(g, _col([x0]))[0])
    us: dict[int, float] = {}
    for i, n in enumerate(sol.ns):
        if isinstance(u, str):
            if u == "default":
                us[n] = float(sol.z(n, [x0])[0]) / g0 ** n
            elif u == "zero":
                us[n] = 0.0
            else:
                raise ValueError("u must be 'default', 'zero' or explicit values")
        elif isinstance(u, Mapping):
            us[n] = float(u[n])
        else:
            us[n] = float(list(u)[i])

    def q(n, ts):
        return sol.z(n, ts, 1) / evaluate_many(g, _col(ts)) ** n

    def a_n(n, pts):
        xs = pts[:, 0]
        integ, _ = cumulative_integral(
            lambda ts: (evaluate_many(g, _col(ts)) / g0) ** n * q(n, ts), xs, x0)
        return (g0 / evaluate_many(g, _col(xs))) ** n * (us[n] + integ)

    coeffs = NumericCoefficients(a_n, 1, label="recovered a_n")
    xs = np.linspace(a, b, grid)
    gx = evaluate_many(g, _col(xs))
    worst = 0.0
    mismatch = False
    for n in sol.ns:
        zn = sol.z(n, xs)
        rec = coeffs.values(n, _col(xs)) * gx ** n
        worst = max(worst, float(np.max(np.abs(rec - zn))))
        big = np.abs(zn) > 1e-8
        if np.any(np.sign(rec[big]) != np.sign(zn[big])):
            mismatch = True
    return Recovery(g, coeffs, us, worst, mismatch, xs)


# --------------------------------------------------------------------------
# space-time flavours


class SpacetimeSolver:
    """Per-``n`` problems ``L_m[y_n] = h_g^n`` with ``C[y_n] = 0``, solved
    once and reused for every ``t``; ``f(t, x) = sum_n w_n(t) y_n(x) / n!``
    with ``w_n = h_n`` (space-time) or ``dh_n/dt`` (PDE in time)."""

    def __init__(self, prob: LodeProblem):
        if not prob.time_dependent:
            raise ValueError("spacetime_solve needs flavor 'spacetime' or 'pde_t'")
        self.prob = prob
        self.basis = Basis(prob)
        ns, more = prob.indices()
        self.ns = ns
        self.truncated = more
        A = _boundary_matrix(prob, self.basis)
        a, b = prob.interval
        self.pieces: dict[int, ParticularSolution] = {}
        self.c: dict[int, np.ndarray] = {}
        for n in ns:
            pc = _piece(self.basis, prob, n, weight_free=True)
            at_a = np.array([pc.values([a], r)[0] for r in range(prob.m)])
            at_b = np.array([pc.values([b], r)[0] for r in range(prob.m)])
            self.pieces[n] = pc
            self.c[n] = _solve_constants(A, -boundary_apply(prob, at_a, at_b))
        self.weights = {}
        for n in ns:
            e = prob.h.at(n)
            if not isinstance(e, Expr):
                raise ValueError("time flavours need symbolic h_n")
            if e.variables() - {1}:
                raise ArityError(f"h_{n} may only depend on t")
            self.weights[n] = diff(e, 1) if prob.flavor == "pde_t" else e

    def y_n(self, n: int, xs, r: int = 0) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).reshape(-1)
        return self.pieces[n].values(xs, r) + self.basis.derivative(xs, r) @ self.c[n]

    def weight(self, n: int, t: float) -> float:
        return float(evaluate_many(self.weights[n], np.array([[0.0, t]]))[0])

    def at(self, t: float) -> Mtmf:
        w = {n: self.weight(n, t) for n in self.ns}
        coeffs = NumericCoefficients(lambda n, pts: w[n] * self.y_n(n, pts[:, 0]), 1,
                                     label=f"w_n({t})*y_n")
        return Mtmf(1, IndexSet.finite(self.ns), coeffs, Const(1), self.prob.policy)

    def residual(self, t: float, grid: int = 201) -> float:
        """``sup |L_m[f(t, .)] - sum_n w_n(t) h_g^n / n!|`` (FD in the top order)."""
        prob = self.prob
        a, b = prob.interval
        m = prob.m
        xs = np.linspace(a, b, grid)
        h = 1e-4 * (b - a)
        w = {n: self.weight(n, t) for n in self.ns}

        def f(q, r):
            out = np.zeros(len(q))
            for n in self.ns:
                out = out + w[n] * self.y_n(n, q, r) / math.factorial(n)
            return out

        lhs = evaluate_many(prob.p[m], _col(xs)) * _fd_first(lambda q: f(q, m - 1), xs, a, b, h)
        for r in range(m):
            lhs = lhs + evaluate_many(prob.p[r], _col(xs)) * f(xs, r)
        hg = evaluate_many(prob.h_g, _col(xs))
        rhs = sum(w[n] * hg ** n / math.factorial(n) for n in self.ns)
        return float(np.max(np.abs(lhs - rhs)))


_SPACETIME_CACHE: dict[int, tuple[LodeProblem, SpacetimeSolver]] = {}


def spacetime_solve(prob: LodeProblem, t: float) -> Mtmf:
    """``f(t, .)`` as an MTMF in ``x``; the x-problems are cached per problem."""
    hit = _SPACETIME_CACHE.get(id(prob))
    if hit is None or hit[0] is not prob:
        hit = (prob, SpacetimeSolver(prob))
        _SPACETIME_CACHE[id(prob)] = hit
    return hit[1].at(t)
