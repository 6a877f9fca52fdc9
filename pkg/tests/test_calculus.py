import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

import oracles
from mtmf.errors import ArityError, BudgetExceededError, NonDifferentiableError
from mtmf.expr import Const, evaluate_many, parse
from mtmf.indexset import IndexSet
from mtmf.taylor import ExprList, constant, from_coefficients, from_generator, trivial_rep
from mtmf.calculus import (
    SeparatedMtmf,
    d1_separated,
    d2_separated,
    dk_general,
    fd_check,
    finite_difference,
    residual_kth_ode,
    shift,
    shift_indexset,
)


def values(f, pts):
    return f.evaluate_many(np.asarray(pts, dtype=float))[0]


class TestShift:
    def test_drop_leading(self):
        a = ExprList([Const(v) for v in (1, 2, 3, 4)])
        s = shift(a, 1)
        assert [s.at(n) for n in range(3)] == [Const(2), Const(3), Const(4)]

    def test_identity(self):
        a = ExprList([Const(1)])
        assert shift(a, 0) is a

    def test_twice(self):
        a = ExprList([Const(v) for v in (1, 2, 3, 4)])
        s = shift(a, 2)
        assert [s.at(n) for n in range(2)] == [Const(3), Const(4)]
        assert shift(shift(a, 1), 1).at(0) == Const(3)

    def test_indexset(self):
        assert shift_indexset(IndexSet.range(3), 2).enumerate_up_to(10) == [0, 1]


class TestD1:
    def test_exp_partial(self):
        f = SeparatedMtmf.build(["1", "1", "1"], "x", 1)
        d = d1_separated(f, 0)
        xs = np.linspace(-1, 1, 5)
        pts = np.column_stack([xs, np.zeros_like(xs)])
        assert np.allclose(values(d, pts), 1 + xs, atol=1e-15)

    def test_constant_series(self):
        f = SeparatedMtmf.build(["sin(t)"], "x", 1)
        assert values(d1_separated(f, 0), [[0.4, 1.0]])[0] == 0.0

    def test_square_base(self):
        f = SeparatedMtmf.build(["1", "1"], "x^2", 1)
        assert values(d1_separated(f, 0), [[0.7, 0.0]])[0] == pytest.approx(1.4, abs=1e-15)

    def test_indicator_rejected(self):
        f = SeparatedMtmf.build(["1", "1"], "x*ind(0, 1)", 1)
        with pytest.raises(NonDifferentiableError):
            d1_separated(f, 0)

    def test_axis_checked(self):
        f = SeparatedMtmf.build(["1", "1"], "x", 1)
        with pytest.raises(ArityError):
            d1_separated(f, 1)

    def test_separation_enforced(self):
        with pytest.raises(ValueError):
            SeparatedMtmf.build(["x"], "x", 1)
        with pytest.raises(ValueError):
            SeparatedMtmf.build(["1"], "x*t", 1)


class TestD2:
    def test_exp_partial(self):
        f = SeparatedMtmf.build(["1"] * 4, "x", 1)
        xs = np.linspace(-1, 1, 5)
        pts = np.column_stack([xs, np.zeros_like(xs)])
        assert np.allclose(values(d2_separated(f, 0, 0), pts), 1 + xs, atol=1e-15)

    def test_symmetric(self):
        f = SeparatedMtmf.build(["1", "t", "t^2", "cos(t)"], "x1^2*x2 + sin(x1)", 2)
        pts = np.random.default_rng(1).uniform(-1, 1, (20, 3))
        assert np.max(np.abs(values(d2_separated(f, 0, 1), pts) - values(d2_separated(f, 1, 0), pts))) <= 1e-12


class TestDk:
    def test_order_zero(self):
        f = from_coefficients([parse("x1", 1), Const(2), Const(3)], parse("x1^2 + 1", 1), IndexSet.range(2))
        xs = np.linspace(-1, 1, 7).reshape(-1, 1)
        assert np.allclose(dk_general(f, 0, 0)(xs), values(f, xs), rtol=1e-15)

    def test_hand_example(self):
        f = from_coefficients([Const(0), Const(0), Const(1)], parse("x1^2", 1), IndexSet.finite([2]))
        xs = np.linspace(-2, 2, 9)
        assert np.allclose(dk_general(f, 0, 2)(xs.reshape(-1, 1)), 6 * xs ** 2, rtol=1e-14, atol=0)

    def test_budget(self):
        f = from_generator("1", parse("x1", 1), IndexSet.range(30), 1)
        with pytest.raises(BudgetExceededError, match="composition"):
            dk_general(f, 0, 4, budget_limit=1000)

    def test_against_sympy(self):
        rng = np.random.default_rng(11)
        names = ["x1", "x2"]
        for _ in range(4):
            N = int(rng.integers(1, 7))
            g = oracles.random_poly_text(rng, names, 4)
            coeffs = [oracles.random_poly_text(rng, names, 2, terms=2) for _ in range(N + 1)]
            f = from_coefficients([parse(c, 2) for c in coeffs], parse(g, 2), IndexSet.range(N))
            ref, syms = oracles.sympy_truncated_series(coeffs, g, names)
            pts = rng.uniform(-1, 1, (10, 2))
            for k in range(4):
                got = dk_general(f, 0, k)(pts)
                d = sp.diff(ref, syms[0], k)
                for p, v in zip(pts, got):
                    exact = float(d.subs(dict(zip(syms, map(sp.Float, p)))).evalf(30))
                    assert abs(v - exact) <= 1e-9 * abs(exact) + 1e-300


class TestPathAgreement:
    @settings(max_examples=25)
    @given(st.integers(0, 2**32 - 1))
    def test_d1_d2_match_general(self, seed):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(2, 7))
        g = oracles.random_poly_text(rng, ["x"], 4)
        coeffs = [oracles.random_poly_text(rng, ["t"], 2, terms=2) for _ in range(N + 1)]
        f = SeparatedMtmf.build(coeffs, g, 1)
        pts = rng.uniform(-1, 1, (10, 2))
        d1 = values(d1_separated(f, 0), pts)
        d2 = values(d2_separated(f, 0, 0), pts)
        g1 = dk_general(f.f, 0, 1)(pts)
        g2 = dk_general(f.f, 0, 2)(pts)
        assert np.max(np.abs(d1 - g1) / np.maximum(1.0, np.abs(g1))) <= 1e-10
        assert np.max(np.abs(d2 - g2) / np.maximum(1.0, np.abs(g2))) <= 1e-10


def test_shift_identity():
    f = SeparatedMtmf.build(["2", "t", "3*t^2", "-1"], "x^2 - 2*x", 1)
    pts = np.array([[0.5, 2.0], [-1.0, 0.5], [2.0, 1.0]])
    got = values(d1_separated(f, 0), pts)
    x, t = pts[:, 0], pts[:, 1]
    g, dg = x ** 2 - 2 * x, 2 * x - 2
    a = [np.full_like(t, 2.0), t, 3 * t ** 2, np.full_like(t, -1.0)]
    ref = dg * sum(a[k + 1] * g ** k / math.factorial(k) for k in range(3))
    assert np.array_equal(got, ref) or np.max(np.abs(got - ref)) <= 1e-14 * np.max(np.abs(ref))


class TestResidual:
    def test_first_order(self):
        f = SeparatedMtmf.build(["1"] * 4, "x", 1)
        grid = np.column_stack([np.linspace(0, 1, 21), np.zeros(21)])
        assert np.max(np.abs(residual_kth_ode(f, 0, 1, grid))) <= 1e-10

    def test_order_zero(self):
        f = SeparatedMtmf.build(["1", "t", "t^2"], "x^3 + x", 1)
        grid = np.random.default_rng(2).uniform(-1, 1, (10, 2))
        assert np.max(np.abs(residual_kth_ode(f, 0, 0, grid))) <= 1e-12

    def test_random_polynomial_second_order(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            g = oracles.random_poly_text(rng, ["x"], 4)
            coeffs = [oracles.random_poly_text(rng, ["t"], 2, terms=2) for _ in range(5)]
            f = SeparatedMtmf.build(coeffs, g, 1)
            grid = rng.uniform(-1, 1, (30, 2))
            assert np.max(np.abs(residual_kth_ode(f, 0, 2, grid))) <= 1e-8


class TestFiniteDifference:
    def test_exp_series(self):
        f = from_generator("1", parse("x1", 1), IndexSet.all(), 1)
        assert fd_check(dk_general(f, 0, 1), [0.3]) <= 1e-6

    def test_constant(self):
        ev = dk_general(constant(3.0), 0, 2)
        assert ev.value([0.2]) == 0.0
        assert fd_check(ev, [0.2]) == 0.0

    def test_sine(self):
        ev = dk_general(trivial_rep("sin(x1)", 1), 0, 2)
        assert abs(ev.value([1.0]) + math.sin(1.0)) <= 1e-14
        assert fd_check(ev, [1.0]) <= 1e-6

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_stencils(self, k):
        fn = lambda p: np.exp(2 * p[:, 0])  # noqa: E731
        assert finite_difference(fn, [0.1], 0, k) == pytest.approx(2 ** k * math.exp(0.2), rel=1e-5)

    def test_order_limit(self):
        with pytest.raises(ValueError):
            finite_difference(np.sin, [0.0], 0, 5)
