"""Independent oracles used by the test-suite.

Nothing here imports ``mtmf``: the recurrences, closed forms and reference
sums are written from textbook definitions so they can adjudicate the
package's own routes.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

DATA = Path(__file__).parent / "data" / "oracles.json"


def frozen() -> dict:
    return json.loads(DATA.read_text())


# --------------------------------------------------------------------------
# three-term recurrences, exact rationals, ascending coefficient lists


def _shift(p):
    return [Fraction(0)] + list(p)


def _axpy(a, p, b, q):
    n = max(len(p), len(q))
    p = list(p) + [Fraction(0)] * (n - len(p))
    q = list(q) + [Fraction(0)] * (n - len(q))
    return [a * u + b * v for u, v in zip(p, q)]


def _recurrence(n_max, p0, p1, step):
    """``P_{n+1} = step(n, P_n, P_{n-1})``."""
    out = [p0, p1]
    for n in range(1, n_max):
        out.append(step(n, out[n], out[n - 1]))
    return out[: n_max + 1]


def legendre(n_max):
    # (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
    return _recurrence(n_max, [Fraction(1)], [Fraction(0), Fraction(1)],
                       lambda n, p, q: _axpy(Fraction(2 * n + 1, n + 1), _shift(p), Fraction(-n, n + 1), q))


def hermite(n_max):
    # H_{n+1} = 2x H_n - 2n H_{n-1}
    return _recurrence(n_max, [Fraction(1)], [Fraction(0), Fraction(2)],
                       lambda n, p, q: _axpy(Fraction(2), _shift(p), Fraction(-2 * n), q))


def laguerre(n_max):
    # (n+1) L_{n+1} = (2n+1-x) L_n - n L_{n-1}
    def step(n, p, q):
        t = _axpy(Fraction(2 * n + 1), p, Fraction(-1), _shift(p))
        return _axpy(Fraction(1, n + 1), t, Fraction(-n, n + 1), q)

    return _recurrence(n_max, [Fraction(1)], [Fraction(1), Fraction(-1)], step)


def chebyshev_t(n_max):
    return _recurrence(n_max, [Fraction(1)], [Fraction(0), Fraction(1)],
                       lambda n, p, q: _axpy(Fraction(2), _shift(p), Fraction(-1), q))


def chebyshev_u(n_max):
    return _recurrence(n_max, [Fraction(1)], [Fraction(0), Fraction(2)],
                       lambda n, p, q: _axpy(Fraction(2), _shift(p), Fraction(-1), q))


def jacobi(n_max, a, b):
    a, b = Fraction(a), Fraction(b)
    p1 = [(a - b) / 2, (a + b + 2) / 2]

    def step(n, p, q):
        # 2(n+1)(n+a+b+1)(2n+a+b) P_{n+1}
        #   = (2n+a+b+1)[(2n+a+b+2)(2n+a+b) x + a^2 - b^2] P_n - 2(n+a)(n+b)(2n+a+b+2) P_{n-1}
        s = 2 * n + a + b
        den = 2 * (n + 1) * (n + a + b + 1) * s
        lin = (s + 1) * (s + 2) * s
        const = (s + 1) * (a * a - b * b)
        t = _axpy(lin, _shift(p), const, p)
        return _axpy(1 / den, t, -2 * (n + a) * (n + b) * (s + 2) / den, q)

    return _recurrence(n_max, [Fraction(1)], p1, step)


JACOBI_PARAMS = (Fraction(1, 2), Fraction(3, 2))


def family_recurrence(tag, n_max):
    if tag == "jacobi":
        return jacobi(n_max, *JACOBI_PARAMS)
    return {"legendre": legendre, "hermite": hermite, "laguerre": laguerre,
            "chebyshev_t": chebyshev_t, "chebyshev_u": chebyshev_u}[tag](n_max)


def family_norm(tag, n):
    """Classical ``int P_n^2 w``."""
    if tag == "legendre":
        return 2.0 / (2 * n + 1)
    if tag == "hermite":
        return math.sqrt(math.pi) * 2.0 ** n * math.factorial(n)
    if tag == "laguerre":
        return 1.0
    if tag == "chebyshev_t":
        return math.pi if n == 0 else math.pi / 2
    if tag == "chebyshev_u":
        return math.pi / 2
    a, b = (float(v) for v in JACOBI_PARAMS)
    return (2 ** (a + b + 1) / (2 * n + a + b + 1)
            * math.gamma(n + a + 1) * math.gamma(n + b + 1)
            / (math.gamma(n + a + b + 1) * math.factorial(n)))


# --------------------------------------------------------------------------
# zeta: high-N partial sum plus integral tail


def zeta_partial_tail(s: float, N: int = 200_000) -> tuple[float, float]:
    """``sum_{n<N} n^-s + int_N^inf t^-s dt`` and the tail-bound width ``N^-s``."""
    n = np.arange(1, N, dtype=float)
    head = math.fsum(np.sort(n ** -s))
    tail = N ** (1 - s) / (s - 1)
    # the true tail lies in [int_N^inf, int_N^inf + N^-s]
    return head + tail + 0.5 * N ** -s, 0.5 * N ** -s


# --------------------------------------------------------------------------
# closed-form solutions of the ODE acceptance problems


def ode_closed_forms():
    """Map name -> (callable y(x), derivative y'(x))."""
    A = np.array([[math.cos(1), math.sin(1)], [math.cos(3), math.sin(3)]])
    c1 = np.linalg.solve(A, [-1.0, -3.0])
    harmonic = (lambda x: x + c1[0] * np.cos(x) + c1[1] * np.sin(x),
                lambda x: 1 - c1[0] * np.sin(x) + c1[1] * np.cos(x))
    first = (lambda x: (x - 0.5) * np.exp(x), lambda x: (x + 0.5) * np.exp(x))
    A = np.array([[math.exp(0.5), math.exp(-0.5)], [math.exp(1.5), math.exp(-1.5)]])
    c3 = np.linalg.solve(A, [-0.25 * math.exp(0.5), -0.75 * math.exp(1.5)])
    second = (lambda x: x * np.exp(x) / 2 + c3[0] * np.exp(x) + c3[1] * np.exp(-x),
              lambda x: (x + 1) * np.exp(x) / 2 + c3[0] * np.exp(x) - c3[1] * np.exp(-x))
    # x^2 y'' + x y' - y = x^2: y = x^2/3 + A x + B/x, y(1) = 0, y'(2) = 0
    A_, B_ = np.linalg.solve(np.array([[1.0, 1.0], [1.0, -0.25]]), [-1 / 3, -4 / 3])
    euler = (lambda x: x ** 2 / 3 + A_ * x + B_ / x, lambda x: 2 * x / 3 + A_ - B_ / x ** 2)
    return {"harmonic": harmonic, "first_order": first, "second_order": second, "euler": euler}


# --------------------------------------------------------------------------
# random polynomial data as text, shared by the package parser and sympy


def random_poly_text(rng: np.random.Generator, names, degree: int, terms: int = 4) -> str:
    """Sum of ``terms`` random monomials of total degree <= ``degree``."""
    parts = []
    for _ in range(terms):
        c = round(float(rng.uniform(-2, 2)), 3)
        mono = []
        for v in names:
            e = int(rng.integers(0, degree + 1))
            if e:
                mono.append(f"{v}^{e}")
        # keep the total degree within bounds by dropping factors from the end
        while sum(int(m.split("^")[1]) for m in mono) > degree:
            mono.pop()
        parts.append("*".join([f"({c})"] + mono))
    return " + ".join(parts)


def sympy_truncated_series(coeffs, g: str, names):
    """``sum_n a_n g^n / n!`` as a sympy expression plus its symbols."""
    import sympy as sp

    syms = sp.symbols(" ".join(names))
    syms = syms if isinstance(syms, tuple) else (syms,)
    loc = dict(zip(names, syms))
    gs = sp.sympify(g, locals=loc, convert_xor=True)
    total = sum(sp.sympify(a, locals=loc, convert_xor=True) * gs ** n / sp.factorial(n)
                for n, a in enumerate(coeffs))
    return sp.expand(total), syms
