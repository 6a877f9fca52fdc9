import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from mtmf.errors import ExprError
from mtmf.expr import Var
from mtmf.lie import LieOperator, check_against_ivp, lie_apply, nlode_solve, taylor_factorial_form
from mtmf.ode import LodeProblem, general_solution

REF = oracles.frozen()


class TestLieApply:
    def test_translation(self):
        r = lie_apply(LieOperator.single("1"), "y^2", "t", 5, [1.0, 1.0])
        assert r.value == 4.0 and not r.budget_exceeded

    def test_order_zero(self):
        r = lie_apply(LieOperator.single("y"), "sin(y)", "t", 0, [0.8, 3.0])
        assert r.value == math.sin(0.8)

    def test_scaling(self):
        r = lie_apply(LieOperator.single("y"), "y", "t", 20, [2.0, 1.0])
        assert abs(r.value - 2 * math.e) <= 1e-9
        assert r.mtmf.B.enumerate_up_to(30) == list(range(21))

    def test_planar_shift(self):
        # d/dx + d/dy translates both coordinates
        r = lie_apply(LieOperator.planar("1"), "x*y", "t", 3, [1.0, 2.0, 0.5])
        assert r.value == pytest.approx(1.5 * 2.5, abs=1e-15)

    def test_budget_flag(self):
        L = LieOperator.single("sin(y)*cos(y) + y^3")
        powers, exceeded = L.powers(Var(0), 8, node_budget=200)
        assert exceeded and len(powers) < 9

    def test_coefficient_variables(self):
        with pytest.raises(ExprError):
            LieOperator.single("t*y")
        with pytest.raises(ValueError):
            lie_apply(LieOperator.single("1"), "y", "t", -1, [0.0, 0.0])


class TestNlode:
    def test_tangent(self):
        sol = nlode_solve("1 + y^2", 7)
        assert sol.exact
        assert sol.coefficients[1:] == [1, 0, 2, 0, 16, 0, 272]
        assert [str(v) for v in sol.coefficients] == REF["tan_an"][:8]
        assert taylor_factorial_form(sol.coefficients)[7] == Fraction(17, 315)

    def test_linear_forcing(self):
        sol = nlode_solve("x", 5)
        assert sol.coefficients == [0, 0, 1, 0, 0, 0]

    def test_zero(self):
        sol = nlode_solve("0", 4)
        assert all(v == 0 for v in sol.coefficients)
        assert sol(0.3) == 0.0

    def test_order_checked(self):
        with pytest.raises(ValueError):
            nlode_solve("y", 0)

    def test_linear_reference(self):
        sol = nlode_solve("x*y + exp(x)", 8)
        assert [float(v) for v in sol.coefficients] == [float(v) for v in REF["linear_nlode_an"]]

    def test_tangent_accuracy(self):
        assert nlode_solve("1 + y^2", 15).check(0.0, 0.5) <= 1e-6

    def test_convergence_in_order(self):
        errs = [check_against_ivp(nlode_solve("1 + y^2", N), 0.0, 0.5) for N in range(5, 16)]
        assert all(b <= a for a, b in zip(errs, errs[1:]))

    def test_embedding(self):
        sol = nlode_solve("1 + y^2", 9)
        xs = np.linspace(-0.4, 0.4, 9)
        direct = [math.fsum(float(a) * x ** n / math.factorial(n) for n, a in enumerate(sol.coefficients))
                  for x in xs]
        assert np.max(np.abs(sol(xs) - direct)) <= 1e-12

    def test_matches_linear_solver(self):
        # y' = x y + exp(x), y(0) = 0 through the first-order LODE path
        prob = LodeProblem.from_dict({
            "m": 1, "p": ["-x", "1"], "interval": [0, 0.5], "B": "{0}", "h_n": ["exp(x)"],
            "h_g": "x", "M": [[1]], "N": [[0]]})
        lode = general_solution(prob)
        sol = nlode_solve("x*y + exp(x)", 15)
        xs = np.linspace(0, 0.5, 51)
        assert np.max(np.abs(sol(xs) - lode(xs))) <= 1e-6
