import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mtmf.errors import ArityError, SeriesOverflowError
from mtmf.expr import Const, Var, evaluate, parse
from mtmf.indexset import IndexSet
from mtmf.quadrature import QuadratureSpec
from mtmf.taylor import (
    Mtmf,
    TruncationPolicy,
    approx_simple,
    constant,
    from_coefficients,
    from_generator,
    linear_combine,
    mtmf_from_dict,
    pointwise_product,
    polish_integrability_check,
    simple_rep,
    trivial_rep,
)

from strategies import smooth_exprs

E = math.e


def exp_series(policy=None):
    return from_generator("1", Var(0), IndexSet.all(), 1, policy)


class TestEvaluate:
    def test_empty_index_set(self):
        f = from_coefficients([Const(1)], Var(0), IndexSet.empty())
        assert f.evaluate([0.7])[0] == 0.0

    def test_exponential_series(self):
        value, rep = exp_series().evaluate([1.0])
        assert abs(value - E) <= 1e-9
        assert rep.converged and not rep.truncated

    def test_trivial_representation_value(self):
        h = parse("sin(x1)*x1 + 3", 1)
        f = from_coefficients([Const(0), Const(1)], h, IndexSet.finite([1]))
        assert f.evaluate([0.4])[0] == evaluate(h, [0.4])

    def test_zero_to_the_zero(self):
        f = from_coefficients([Const(5), Const(7)], parse("x1", 1))
        assert f.evaluate([0.0])[0] == 5.0

    def test_truncation_reported(self):
        f = exp_series(TruncationPolicy(max_terms=5))
        value, rep = f.evaluate([1.0])
        assert rep.truncated and not rep.converged
        assert value == pytest.approx(1 + 1 + 1 / 2 + 1 / 6 + 1 / 24, rel=1e-15)

    def test_overflow_names_offending_term(self):
        f = from_generator("1", Var(0), IndexSet.all(), 1, TruncationPolicy(max_terms=400))
        with pytest.raises(SeriesOverflowError) as info:
            f.evaluate([1e200])
        assert info.value.n >= 2

    def test_arity_checked(self):
        with pytest.raises(ArityError):
            exp_series().evaluate([1.0, 2.0])


class TestTrivialRep:
    def test_sin_zero(self):
        assert trivial_rep("sin(x1)", 1)(0.0) == 0.0

    def test_square(self):
        assert trivial_rep("x1^2", 1)(2.0) == 4.0

    def test_roundtrip(self):
        g = parse("exp(x1)*cos(x1)", 1)
        f = trivial_rep(g)
        ff = trivial_rep(f.g)
        for x in np.random.default_rng(3).uniform(-2, 2, 10):
            assert f(x) == ff(x)


class TestSimpleRep:
    def test_cells(self):
        f = simple_rep([[(0, 1)], [(1, 2)]], [2, 5])
        assert f(1.5) == 5.0
        assert f(0.5) == 2.0
        assert f(3.0) == 0.0

    def test_single_cell(self):
        f = simple_rep([[(-1e6, 1e6)]], [7])
        assert f(0.0) == 7.0 and f(123.0) == 7.0

    def test_overlap_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            simple_rep([[(0, 2)], [(1, 3)]], [1, 1])


class TestLinearCombine:
    def test_identity_case(self):
        f1 = exp_series()
        f2 = trivial_rep("x1^2", 1)
        h = linear_combine(1.0, f1, 0.0, f2)
        for x in np.random.default_rng(4).uniform(-1, 1, 10):
            assert h(x) == pytest.approx(f1(x), abs=1e-12)

    def test_two_exp_plus_three_x(self):
        assert linear_combine(2.0, exp_series(), 3.0, trivial_rep("x1", 1))(0.0) == 2.0

    def test_zero(self):
        h = linear_combine(0.0, exp_series(), 0.0, trivial_rep("x1", 1))
        assert h(0.8) == 0.0

    def test_union_index_set(self):
        f1 = from_coefficients([Const(1)], Var(0), IndexSet.finite([0]))
        f2 = from_coefficients([Const(0), Const(0), Const(1)], Var(0), IndexSet.finite([2]))
        h = linear_combine(1.0, f1, 1.0, f2)
        assert h.B.enumerate_up_to(5) == [0, 2]
        assert h(3.0) == pytest.approx(1 + 9 / 2)

    def test_arity_mismatch(self):
        with pytest.raises(ArityError):
            linear_combine(1.0, trivial_rep("x1", 1), 1.0, trivial_rep("x1*x2", 2))


class TestProduct:
    def test_trivial_square(self):
        x = trivial_rep("x1", 1)
        assert pointwise_product(x, x)(2.0) == 4.0

    def test_times_one(self):
        f = exp_series()
        one = constant(1.0)
        assert pointwise_product(f, one)(0.3) == f(0.3)

    def test_exp_squared(self):
        f = exp_series()
        assert abs(pointwise_product(f, f)(1.0) - E ** 2) <= 1e-6


class TestApproxSimple:
    def test_bound_on_identity(self):
        f = trivial_rep("x1", 1)
        xs = np.linspace(0, 1, 101)
        for j, k in [(4, 4), (6, 8), (8, 6)]:
            h = approx_simple(f, j, k, [(0, 1)])
            err = np.max(np.abs(f.evaluate_many(xs)[0] - h.evaluate_many(xs)[0]))
            assert err <= 2.0 ** -k + 2.0 ** -j

    def test_monotone_in_j(self):
        f = trivial_rep("x1^2 + 0.3", 1)
        xs = np.linspace(0, 1, 101)
        errs = [np.max(np.abs(f.evaluate_many(xs)[0] - approx_simple(f, j, 6, [(0, 1)]).evaluate_many(xs)[0]))
                for j in range(2, 10)]
        assert all(b <= a for a, b in zip(errs, errs[1:]))

    def test_dyadic_constant_exact(self):
        f = constant(0.375)
        h = approx_simple(f, 3, 3, [(0, 1)])
        assert h(0.5) == 0.375

    def test_outside_domain(self):
        h = approx_simple(trivial_rep("x1", 1), 4, 4, [(0, 1)])
        with pytest.raises(ValueError, match="outside"):
            h(1.5)


class TestPolish:
    def test_identity_integral(self):
        rep = polish_integrability_check(trivial_rep("x1", 1), QuadratureSpec(((0, 1),)), 1.0)
        assert [e.n for e in rep] == [1]
        assert rep[0].value == pytest.approx(1 / 3, abs=1e-12) and rep[0].finite

    def test_cancellation(self):
        # a_1 = g + c  ->  (g - a_1 + c)^2 = 0
        f = from_coefficients([Const(0), parse("x1 + 2", 1)], Var(0), IndexSet.finite([1]))
        rep = polish_integrability_check(f, QuadratureSpec(((0, 1),)), 2.0)
        assert abs(rep[0].value) <= 1e-14

    def test_c_must_be_positive(self):
        with pytest.raises(ValueError):
            polish_integrability_check(trivial_rep("x1", 1), QuadratureSpec(((0, 1),)), 0.0)


class TestLiteral:
    def test_generator_literal(self):
        f = mtmf_from_dict({"arity": 1, "B": "N", "a": {"gen": "1"}, "g": "x"})
        assert abs(f(1.0) - E) <= 1e-9

    def test_list_literal_with_vars(self):
        f = mtmf_from_dict({"arity": 2, "B": "{0,1}", "a": ["1", "y"], "g": "x", "vars": ["x", "y"]})
        assert f([2.0, 3.0]) == 1 + 3 * 2

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown"):
            mtmf_from_dict({"arity": 1, "B": "N", "a": ["1"], "g": "x", "colour": 1})

    def test_missing_key(self):
        with pytest.raises(ValueError, match="missing"):
            mtmf_from_dict({"arity": 1, "a": ["1"], "g": "x"})


# --------------------------------------------------------------------------
# properties


@given(smooth_exprs(arity=2), st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_trivial_representation_law(h, x):
    assert trivial_rep(h, 2)(x) == evaluate(h, x)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1, 1))
def test_linearity_law(alpha, beta, x):
    f1 = exp_series()
    f2 = from_generator("1/(n+1)", parse("x1/2", 1), IndexSet.positive(), 1)
    h = linear_combine(alpha, f1, beta, f2)
    tol = f1.policy.abs_tol
    assert abs(h(x) - (alpha * f1(x) + beta * f2(x))) <= 2 * tol * max(1.0, abs(alpha) + abs(beta)) * 10


@given(st.floats(-2, 2))
def test_convergence_certificate(x):
    f = exp_series()
    v, rep = f.evaluate([x])
    if rep.converged:
        v2, _ = f.with_policy(TruncationPolicy(max_terms=128)).evaluate([x])
        assert abs(v - v2) < 10 * f.policy.abs_tol
