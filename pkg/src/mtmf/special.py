"""Catalogue of special functions written as MTMFs.

Riemann zeta (univariate and multivariate), Pochhammer symbols and the
generalised hypergeometric series, the six classical orthogonal polynomial
families built from a Rodrigues-type formula ``P_n = a_n h(x) d^n/dx^n[h_n]``,
and monomials.  Each catalogue value has a scalar path and an explicit
:class:`~mtmf.taylor.Mtmf` path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import bernoulli

from .errors import MtmfError, NotPolynomialError
from .expr import (
    Const,
    Expr,
    Func,
    Mul,
    Pow,
    Var,
    as_polynomial,
    evaluate_many,
    format_polynomial,
    nth_derivative,
    poly_expr,
    simplify,
)
from .indexset import IndexSet
from .quadrature import QuadratureSpec, integrate
from .taylor import Mtmf, NumericCoefficients, TruncationPolicy, trivial_rep

# --------------------------------------------------------------------------
# Pochhammer and hypergeometric series


def pochhammer(a: float, n: int):
    """Rising factorial ``(a)_n = a (a+1) ... (a+n-1)``, ``(a)_0 = 1``.

    Exact for int and Fraction input.
    """
    if n < 0:
        raise ValueError("n must be a natural number")
    out = 1 if isinstance(a, (int, Fraction)) else 1.0
    for i in range(n):
        out = out * (a + i)
    return out


class HypergeometricPoleError(MtmfError):
    """A lower parameter is a non-positive integer reached by the series."""


@dataclass(frozen=True)
class HypResult:
    value: float
    error: float
    terms: int
    converged: bool
    terminated: bool = False
    divergent: bool = False

    def __float__(self) -> float:
        return self.value

    def describe(self) -> str:
        if self.terminated:
            return f"terminating series ({self.terms} terms)"
        if self.divergent:
            return f"DIVERGENT: partial sum of {self.terms} terms"
        state = "converged" if self.converged else "truncated"
        return f"{state} after {self.terms} terms, error <= {self.error:.2e}"


HYP_POLICY = TruncationPolicy(max_terms=10000, abs_tol=1e-15, consecutive_small=3)


def _is_nonpos_int(v) -> bool:
    return float(v) <= 0 and float(v) == math.floor(float(v))


def hypergeometric(a: Sequence[float], b: Sequence[float], x: float,
                   policy: TruncationPolicy | None = None) -> HypResult:
    """``pFq(a; b; x) = sum_n [prod (a_i)_n / prod (b_j)_n] x^n / n!``.

    Terms follow the ratio recurrence.  A series with a non-positive integer
    upper parameter terminates exactly.  ``p = q + 1`` with ``|x| >= 1`` (or
    ``p > q + 1`` with ``x != 0``) is flagged divergent and the partial sum
    is returned.
    """
    policy = policy or HYP_POLICY
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    p, q = len(a), len(b)
    divergent = x != 0 and ((p == q + 1 and abs(x) >= 1) or p > q + 1)
    terms = [1.0]
    t = 1.0
    small = 0
    converged = False
    terminated = False
    ratio = 0.0
    for n in range(policy.max_terms - 1):
        num = 1.0
        for ai in a:
            num *= ai + n
        if num == 0.0:
            terminated = converged = True
            break
        den = 1.0
        for bj in b:
            if bj + n == 0.0:
                raise HypergeometricPoleError(
                    f"lower parameter {bj} makes the term n={n + 1} infinite")
            den *= bj + n
        ratio = abs(num / den * x / (n + 1))
        t = t * (num / den) * (x / (n + 1))
        if not math.isfinite(t):
            divergent = True
            break
        terms.append(t)
        if t == 0.0:
            terminated = converged = True
            break
        small = small + 1 if abs(t) < policy.abs_tol else 0
        if small >= policy.consecutive_small and not divergent:
            converged = True
            break
    value = math.fsum(terms)
    if terminated:
        err = 0.0
    elif converged and ratio < 1:
        err = abs(terms[-1]) * ratio / (1 - ratio) + 4 * np.finfo(float).eps * abs(value)
    else:
        err = math.inf
    return HypResult(value, float(err), len(terms), converged and not divergent, terminated, divergent)


def hypergeometric_coefficient(a: Sequence[float], b: Sequence[float], n: int) -> float:
    """``c_n = prod (a_i)_n / prod (b_j)_n``."""
    num = 1.0
    for ai in a:
        num *= pochhammer(float(ai), n)
    den = 1.0
    for bj in b:
        den *= pochhammer(float(bj), n)
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise HypergeometricPoleError(f"denominator Pochhammer vanishes at n={n}")
    return num / den


def hypergeometric_mtmf(a: Sequence[float], b: Sequence[float],
                        policy: TruncationPolicy | None = None) -> Mtmf:
    """``pFq`` as ``T_{x, c}(N)`` with constant coefficients ``c_n``.

    Terminating series get a finite index set.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    stop = [int(-v) for v in a if _is_nonpos_int(v)]
    B = IndexSet.range(min(stop)) if stop else IndexSet.all()
    cache: dict[int, float] = {}

    def cn(n: int) -> float:
        v = cache.get(n)
        if v is None:
            v = cache[n] = hypergeometric_coefficient(a, b, n)
        return v

    coeffs = NumericCoefficients(lambda n, pts: np.full(pts.shape[0], cn(n)), 1,
                                 label="pFq", sym=lambda n: Const(cn(n)))
    return Mtmf(1, B, coeffs, Var(0), policy or TruncationPolicy(max_terms=170))


# --------------------------------------------------------------------------
# Riemann zeta


@dataclass(frozen=True)
class ZetaResult:
    value: float
    error: float
    N: int
    corrections: int

    def __float__(self) -> float:
        return self.value


_BERNOULLI = bernoulli(40)


def zeta(x: float, policy: TruncationPolicy | None = None, N: int = 16) -> ZetaResult:
    """``sum_{n>=1} n^-x`` for real ``x > 1``.

    Partial sum to ``N-1``, the integral tail ``N^(1-x)/(x-1)``, the
    half-term ``N^-x/2`` and Euler-Maclaurin corrections until the next
    correction is negligible against ``abs_tol``.  For real ``x > 1`` the remainder is
    bounded by the first omitted correction, which is reported as the error.
    """
    if not x > 1:
        raise ValueError(f"zeta needs x > 1, got {x}")
    policy = policy or TruncationPolicy()
    tol = policy.abs_tol or 1e-15
    s = float(x)
    head = [n ** -s for n in range(1, N)]
    parts = head + [N ** (1 - s) / (s - 1), 0.5 * N ** -s]
    # Euler-Maclaurin: B_2k/(2k)! * s(s+1)...(s+2k-2) * N^(-s-2k+1)
    rising = s
    err = math.inf
    used = 0
    for k in range(1, len(_BERNOULLI) // 2):
        term = _BERNOULLI[2 * k] / math.factorial(2 * k) * rising * N ** (-s - 2 * k + 1)
        if abs(term) < tol * 1e-3 or k == len(_BERNOULLI) // 2 - 1:
            err = abs(term)
            break
        parts.append(term)
        used = k
        rising *= (s + 2 * k - 1) * (s + 2 * k)
    value = math.fsum(parts)
    if err > tol and N < 4096:
        return zeta(x, policy, N * 2)
    # rounding of the fsum'd parts is reported but cannot be reduced by N
    err = float(err + 8 * np.finfo(float).eps * abs(value))
    return ZetaResult(value, err, N, used)


def zeta_mv(x: Sequence[float], policy: TruncationPolicy | None = None) -> ZetaResult:
    """``sum_n n^-(x_1 + ... + x_p)``; defined for ``x_1 + ... + x_p > 1``."""
    s = math.fsum(float(v) for v in x)
    if not s > 1:
        raise ValueError(f"multivariate zeta needs sum(x) > 1, got {s}")
    return zeta(s, policy)


def zeta_mtmf(arity: int = 1, policy: TruncationPolicy | None = None) -> Mtmf:
    """``T_{1, a}(N+)`` with ``a_n(x) = n! / n^(x_1 + ... + x_p)``.

    The weight ``n!`` overflows a double beyond ``n = 170``, so the default
    policy stops there; the slowly converging tail is *not* summed.
    """
    def an(n, pts):
        s = pts.sum(axis=1)
        return math.factorial(n) * np.power(float(n), -s) if n <= 170 else np.full(len(s), np.inf)

    def sym(n):
        s = Var(0)
        for i in range(1, arity):
            s = s + Var(i)
        return simplify(Mul((Const(math.factorial(n)), Pow(Const(n), -s))))

    coeffs = NumericCoefficients(an, arity, label="n!/n^x", sym=sym)
    return Mtmf(arity, IndexSet.positive(), coeffs, Const(1),
                policy or TruncationPolicy(max_terms=170, abs_tol=0.0, consecutive_small=1))


# --------------------------------------------------------------------------
# orthogonal polynomial families


FAMILIES = ("chebyshev_t", "chebyshev_u", "hermite", "jacobi", "laguerre", "legendre")
_ALIASES = {
    "chebyshev_t": "chebyshev_t", "chebyshevt": "chebyshev_t", "chebyshev1": "chebyshev_t",
    "chebyshev-t": "chebyshev_t", "chebyshev_first": "chebyshev_t",
    "chebyshev_u": "chebyshev_u", "chebyshevu": "chebyshev_u", "chebyshev2": "chebyshev_u",
    "chebyshev-u": "chebyshev_u", "chebyshev_second": "chebyshev_u",
    "hermite": "hermite", "jacobi": "jacobi", "laguerre": "laguerre", "legendre": "legendre",
}


def _frac(v) -> Fraction | float:
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    f = Fraction(str(v))
    return f if float(f) == v else float(v)


@dataclass(frozen=True)
class PolynomialFamily:
    """One row of the classical Rodrigues table.

    ``P_n = a_n * h(x) * d^n/dx^n [h_n(x)]``; ``weight`` is the classical
    orthogonality weight (``1/h`` except for Legendre, where ``h = 1``).
    """

    tag: str
    alpha: Fraction | float = 0
    beta: Fraction | float = 0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.tag not in FAMILIES:
            raise ValueError(f"unknown family {self.tag!r}; expected one of {FAMILIES}")
        if self.tag == "jacobi" and not (self.alpha > -1 and self.beta > -1):
            raise ValueError("Jacobi parameters must exceed -1")

    @staticmethod
    def named(name: str, alpha=0, beta=0) -> "PolynomialFamily":
        key = name.strip().lower()
        if key not in _ALIASES:
            raise ValueError(f"unknown polynomial family {name!r}")
        tag = _ALIASES[key]
        if tag == "jacobi":
            return PolynomialFamily(tag, _frac(alpha), _frac(beta))
        return PolynomialFamily(tag)

    @property
    def label(self) -> str:
        if self.tag == "jacobi":
            return f"jacobi({self.alpha},{self.beta})"
        return self.tag

    @property
    def support(self) -> tuple[float, float]:
        return {"hermite": (-math.inf, math.inf), "laguerre": (0.0, math.inf)}.get(self.tag, (-1.0, 1.0))

    def a(self, n: int) -> Fraction:
        f = math.factorial
        sign = -1 if n % 2 else 1
        if self.tag == "chebyshev_t":
            return Fraction(sign * 2 ** n * f(n), f(2 * n))
        if self.tag == "chebyshev_u":
            return Fraction(sign * 2 ** (n + 1) * (n + 1) ** 2 * f(n), f(2 * n + 2))
        if self.tag == "hermite":
            return Fraction(sign)
        if self.tag == "jacobi":
            return Fraction(sign, 2 ** n * f(n))
        if self.tag == "laguerre":
            return Fraction(1, f(n))
        return Fraction(1, 2 ** n * f(n))

    def h(self) -> Expr:
        x = Var(0)
        one = Const(1)
        if self.tag == "chebyshev_t":
            return Pow(one - x ** 2, Const(Fraction(1, 2)))
        if self.tag == "chebyshev_u":
            return Pow(one - x ** 2, Const(Fraction(-1, 2)))
        if self.tag == "hermite":
            return Func("exp", x ** 2)
        if self.tag == "jacobi":
            return Mul((Pow(one - x, Const(-self.alpha)), Pow(one + x, Const(-self.beta))))
        if self.tag == "laguerre":
            return Func("exp", x)
        return one

    def h_n(self, n: int) -> Expr:
        """The function differentiated ``n`` times."""
        x = Var(0)
        one = Const(1)
        if self.tag == "chebyshev_t":
            return Pow(one - x ** 2, Const(Fraction(2 * n - 1, 2)))
        if self.tag == "chebyshev_u":
            return Pow(one - x ** 2, Const(Fraction(2 * n + 1, 2)))
        if self.tag == "hermite":
            return Func("exp", -(x ** 2))
        if self.tag == "jacobi":
            return Mul((Pow(one - x, Const(self.alpha)), Pow(one + x, Const(self.beta)),
                        Pow(one - x ** 2, Const(n))))
        if self.tag == "laguerre":
            return Mul((Pow(x, Const(n)), Func("exp", -x)))
        return Pow(x ** 2 - one, Const(n))

    def weight(self, x: np.ndarray) -> np.ndarray:
        if self.tag == "hermite":
            return np.exp(-x ** 2)
        if self.tag == "laguerre":
            return np.exp(-x)
        if self.tag == "legendre":
            return np.ones_like(x)
        al, be = self._jacobi_params()
        return (1 - x) ** al * (1 + x) ** be

    def _jacobi_params(self) -> tuple[float, float]:
        if self.tag == "chebyshev_t":
            return -0.5, -0.5
        if self.tag == "chebyshev_u":
            return 0.5, 0.5
        if self.tag == "legendre":
            return 0.0, 0.0
        return float(self.alpha), float(self.beta)


def rodrigues_coefficients(family: PolynomialFamily, n: int) -> list:
    """Ascending coefficients of ``a_n h(x) d^n[h_n]`` (exact when possible)."""
    if n < 0:
        raise ValueError("n must be a natural number")
    e = Mul((Const(family.a(n)), family.h(), nth_derivative(family.h_n(n), 0, n)))
    try:
        coeffs = as_polynomial(simplify(e), 0)
    except NotPolynomialError as exc:
        raise NotPolynomialError(
            f"{family.label} n={n}: Rodrigues product did not reduce to a polynomial ({exc})"
        ) from exc
    if len(coeffs) != n + 1 or coeffs[-1] == 0:
        raise NotPolynomialError(f"{family.label} n={n}: expected degree {n}, got {len(coeffs) - 1}")
    return coeffs


def rodrigues_poly(family: PolynomialFamily, n: int) -> Expr:
    """``P_n`` as an explicit polynomial expression in ``x1``."""
    return poly_expr(rodrigues_coefficients(family, n), 0)


def rodrigues_text(family: PolynomialFamily, n: int) -> str:
    return format_polynomial(rodrigues_coefficients(family, n), "x1")


def _substitution_integral(family, cm, cn, tol):
    """``int P_m P_n w dx`` on [-1, 1] with ``x = cos(theta)``.

    ``(1-x)^al (1+x)^be dx`` becomes
    ``2^(al+be+1) sin(th/2)^(2al+1) cos(th/2)^(2be+1) dth``, which is smooth
    for the parameters used here.
    """
    al, be = family._jacobi_params()
    scale = 2.0 ** (al + be + 1)

    def f(pts):
        th = pts[:, 0]
        x = np.cos(th)
        w = scale * np.sin(th / 2) ** (2 * al + 1) * np.cos(th / 2) ** (2 * be + 1)
        return np.polynomial.polynomial.polyval(x, cm) * np.polynomial.polynomial.polyval(x, cn) * w

    return integrate(f, QuadratureSpec(((0.0, math.pi),), rel_tol=tol[0], abs_tol=tol[1]))


def orthogonality_box(family: PolynomialFamily) -> tuple[float, float]:
    """Finite integration interval (Hermite and Laguerre tails truncated)."""
    if family.tag == "hermite":
        return (-12.0, 12.0)
    if family.tag == "laguerre":
        return (0.0, 60.0)
    return (-1.0, 1.0)


@dataclass(frozen=True)
class OrthoReport:
    matrix: np.ndarray
    errors: np.ndarray
    box: tuple[float, float]
    substitution: bool


def orthogonality_matrix(family: PolynomialFamily, n_max: int,
                         quad: QuadratureSpec | None = None) -> OrthoReport:
    """``K[m, n] = int P_m P_n w dx`` for ``m, n <= n_max``.

    Legendre, Hermite and Laguerre integrate on the (truncated) support,
    optionally overridden by ``quad``; Chebyshev and Jacobi weights are
    endpoint-singular and use the cosine substitution instead.
    """
    coeffs = [np.array([float(c) for c in rodrigues_coefficients(family, n)]) for n in range(n_max + 1)]
    rel, ab = (quad.rel_tol, quad.abs_tol) if quad is not None else (1e-13, 1e-12)
    subst = family.tag in ("chebyshev_t", "chebyshev_u", "jacobi")
    box = (0.0, math.pi) if subst else (quad.box[0] if quad is not None else orthogonality_box(family))
    K = np.zeros((n_max + 1, n_max + 1))
    E = np.zeros_like(K)
    for m in range(n_max + 1):
        for n in range(m, n_max + 1):
            if subst:
                res = _substitution_integral(family, coeffs[m], coeffs[n], (rel, ab))
            else:
                def f(pts, cm=coeffs[m], cn=coeffs[n]):
                    x = pts[:, 0]
                    pv = np.polynomial.polynomial.polyval
                    return pv(x, cm) * pv(x, cn) * family.weight(x)

                res = integrate(f, QuadratureSpec((box,), rel_tol=rel, abs_tol=ab, max_subdivisions=4000))
            K[m, n] = K[n, m] = res.value
            E[m, n] = E[n, m] = res.error
    return OrthoReport(K, E, box, subst)


def monomial(b: Sequence[int]) -> Mtmf:
    """``x^b = x_1^b_1 ... x_p^b_p`` in trivial representation."""
    if any(int(v) != v or v < 0 for v in b):
        raise ValueError("monomial exponents must be natural numbers")
    g: Expr = Const(1)
    factors = [Pow(Var(i), Const(int(v))) for i, v in enumerate(b) if v]
    if factors:
        g = simplify(Mul(tuple(factors)))
    return trivial_rep(g, len(b))


def polynomial_values(family: PolynomialFamily, n: int, x) -> np.ndarray:
    """Numeric ``P_n(x)`` from the Rodrigues coefficients."""
    return evaluate_many(rodrigues_poly(family, n), np.asarray(x, dtype=float).reshape(-1, 1))
